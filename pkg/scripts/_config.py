"""Turn a dataclass of experiment settings into command-line flags."""

from __future__ import annotations

import argparse
import dataclasses
from typing import TypeVar

C = TypeVar("C")


def parse(cls: type[C], description: str) -> C:
    parser = argparse.ArgumentParser(description=description,
                                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    for f in dataclasses.fields(cls):
        flag = "--" + f.name.replace("_", "-")
        if isinstance(f.default, tuple):
            parser.add_argument(flag, nargs="+", type=type(f.default[0]), default=f.default)
        else:
            parser.add_argument(flag, type=type(f.default), default=f.default)
    ns = parser.parse_args()
    return cls(**{f.name: tuple(v) if isinstance(v, list) else v for f, v in
                  ((f, getattr(ns, f.name)) for f in dataclasses.fields(cls))})
