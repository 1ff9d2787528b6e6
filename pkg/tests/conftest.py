import numpy as np
import pytest

from monduff import IntegratorConfig, ModelParams


@pytest.fixture
def params_free():
    """Conservative oscillator (no dissipation, no drive)."""
    return ModelParams(beta=0.1, gamma=0.0, g=0.0)


def fast_config(total=20, transient=5, spp=500, stride=5, **kw):
    return IntegratorConfig(total_periods=total, transient_periods=transient,
                            steps_per_period=spp, record_stride=stride, **kw)


def random_states(rng, n, chi_lo=0.05, chi_hi=5.0, scale=3.0):
    """Sampler for generic valid states, away from the chi singularity."""
    from monduff import SemiclassicalState
    out = []
    for _ in range(n):
        out.append(SemiclassicalState(
            t=float(rng.uniform(0.0, 10.0)),
            x=float(rng.uniform(-scale, scale)),
            p=float(rng.uniform(-scale, scale)),
            chi=float(rng.uniform(chi_lo, chi_hi)),
            pi=float(rng.uniform(-scale, scale))))
    return out
