"""Reproducible Wiener increments for the homodyne unraveling.

Streams are keyed by (seed, stream_id) through numpy's Philox counter-based
bit generator, so a sweep over many trajectories reproduces every
per-trajectory increment sequence bit-for-bit regardless of worker count or
execution order. Gaussian variates come from numpy's ziggurat
(Generator.standard_normal); bit-exact reproducibility is therefore promised
per numpy version, as documented in the README.

The complex noise of the unraveling, d_xi = exp(-i phi) dW, is a derived
quantity and never stored; only the real increments dW ~ Normal(0, h) are
generated here.
"""

from __future__ import annotations

import math

import numpy as np

# substream tags occupy the top 16 bits of stream_id (see substream)
TAG_MAIN = 0
TAG_AUX = 1
TAG_REFINE_FIDUCIAL = 2
TAG_REFINE_SHADOW = 3
TAG_BOOTSTRAP = 4

_TAG_SHIFT = 48


class NoiseStream:
    """A value-like, independently owned source of Wiener increments.

    Identical (seed, stream_id) reproduce the identical sequence; distinct
    stream_ids give statistically independent sequences. `counter` counts
    the increments drawn so far.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        seed = int(seed)
        stream_id = int(stream_id)
        if not (0 <= seed < 2 ** 64):
            raise ValueError("seed must fit in 64 unsigned bits")
        if not (0 <= stream_id < 2 ** 64):
            raise ValueError("stream_id must fit in 64 unsigned bits")
        self.seed = seed
        self.stream_id = stream_id
        self.counter = 0
        key = np.array([seed, stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self):
        return (f"NoiseStream(seed={self.seed}, stream_id={self.stream_id}, "
                f"counter={self.counter})")

    def substream(self, tag: int) -> "NoiseStream":
        """Derive an independent stream by tagging the top bits of stream_id.

        Harness stream_ids stay below 2^48, so tags never collide with them.
        """
        if not (0 < tag < 2 ** 16):
            raise ValueError("tag must be in 1..65535")
        return NoiseStream(self.seed, self.stream_id ^ (tag << _TAG_SHIFT))

    def standard_normal(self, n: int | None = None):
        """Raw Normal(0, 1) draws; advances the counter by the draw count."""
        if n is None:
            self.counter += 1
            return self._gen.standard_normal()
        out = self._gen.standard_normal(n)
        self.counter += n
        return out

    def integers(self, low: int, high: int, size=None) -> np.ndarray:
        """Uniform integers in [low, high); used by resampling diagnostics."""
        out = self._gen.integers(low, high, size=size)
        self.counter += int(np.size(out))
        return out

    def wiener_increment(self, h: float) -> float:
        """One increment dW ~ Normal(0, h) for a step of size h > 0."""
        if not (h > 0.0 and math.isfinite(h)):
            raise ValueError(f"step size must be > 0 and finite, got {h}")
        self.counter += 1
        return math.sqrt(h) * self._gen.standard_normal()

    def wiener_increments(self, h: float, n: int) -> np.ndarray:
        """n increments at once; identical values to n scalar draws."""
        if not (h > 0.0 and math.isfinite(h)):
            raise ValueError(f"step size must be > 0 and finite, got {h}")
        if n < 0:
            raise ValueError("n must be >= 0")
        out = math.sqrt(h) * self._gen.standard_normal(n)
        self.counter += n
        return out

    def split_increment(self, dw: float, h: float) -> tuple[float, float]:
        """Refine dw over h into (dw1, dw2) with dw1 + dw2 == dw.

        Conditional (Brownian bridge) sampling: dw1 ~ Normal(dw/2, h/4), so
        each half is marginally Normal(0, h/2) and the refined path is
        consistent with the original increment.
        """
        if not (h > 0.0 and math.isfinite(h)):
            raise ValueError(f"step size must be > 0 and finite, got {h}")
        self.counter += 1
        dw1 = 0.5 * dw + 0.5 * math.sqrt(h) * self._gen.standard_normal()
        return dw1, dw - dw1
