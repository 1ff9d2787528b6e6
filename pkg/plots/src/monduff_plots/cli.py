"""monduff-plots render --spec figure.json"""

from __future__ import annotations

import argparse
import sys

from .figspec import FigureSpecError, load_spec
from .render import render


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise FigureSpecError(message)


def build_parser() -> _Parser:
    p = _Parser(prog="monduff-plots",
                description="Render figure analogues from monduff CSV outputs")
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("render", help="render one figure from a JSON spec")
    sp.add_argument("--spec", required=True, help="figure spec JSON file")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        out = render(load_spec(args.spec))
        print(f"wrote {out}")
        return 0
    except FigureSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
