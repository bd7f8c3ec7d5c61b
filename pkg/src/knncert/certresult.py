"""The result type shared by every certification routine."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .dataset import PredictOutcome


@dataclass(frozen=True)
class CertResult:
    """Verdict of a robustness check.

    When robust, ``certain_label`` is the single label predicted by every
    possible world and there are no witnesses. When not robust, ``witnesses``
    holds up to two (world, outcome) pairs proving it: their outcomes differ,
    or a single tie outcome suffices. ``possible_labels`` lists the labels
    actually seen predicted; the brute-force oracle reports all of them,
    the polynomial routines report the ones their witnesses establish.
    """

    robust: bool
    certain_label: Optional[str]
    possible_labels: tuple[str, ...]
    witnesses: tuple[tuple[tuple[int, ...], PredictOutcome], ...]

    def __post_init__(self) -> None:
        if self.robust:
            assert self.certain_label is not None and not self.witnesses
