"""Optimal piecewise-linear segmentation.

Segments share their boundary sample: a segmentation with cuts
``[c0, c1, ..., cm]`` covers ``[c0, c1], [c1, c2], ...`` with ``c0 = 0`` and
``cm = n - 1``.  Both modes are exact dynamic programs, quadratic in the
number of samples.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from shapemine import kernels
from shapemine.signal import LineFit, Signal, linefit


@dataclass(frozen=True)
class Segmentation:
    cuts: tuple[int, ...]
    fits: tuple[LineFit, ...]

    def __len__(self) -> int:
        return len(self.fits)

    @property
    def segments(self) -> list[tuple[int, int]]:
        return list(zip(self.cuts[:-1], self.cuts[1:]))

    @property
    def max_mse(self) -> float:
        return max(f.mse for f in self.fits)

    @property
    def total_mse(self) -> float:
        return sum(f.mse for f in self.fits)

    def fitted_values(self, sig: Signal) -> np.ndarray:
        """Piecewise-linear approximation sampled at ``sig.times``.

        Shared boundary samples take the value of the later segment.
        """
        out = np.empty(len(sig))
        for (i, j), fit in zip(self.segments, self.fits):
            out[i:j + 1] = fit.a * (sig.times[i:j + 1] - sig.times[i]) + fit.b
        return out


def _kernel_args(sig: Signal):
    ps = sig.prefix_sums
    return ps.sums, ps.t, ps.v, ps.t_shift, ps.v_shift


def _from_cuts(sig: Signal, cuts) -> Segmentation:
    cuts = tuple(int(c) for c in cuts)
    ps = sig.prefix_sums
    fits = tuple(linefit(sig, i, j, ps) for i, j in zip(cuts[:-1], cuts[1:]))
    return Segmentation(cuts, fits)


def segment_min_count(sig: Signal, eps_max: float, backend=None) -> Segmentation:
    """Fewest segments whose least-squares MSE is each at most ``eps_max``.

    Among segmentations with the fewest segments, the one with the smallest
    total MSE is returned (earliest cut on exact ties).
    """
    if len(sig) < 2:
        raise ValueError("segmentation needs at least two samples")
    if not eps_max > 0:
        raise ValueError("eps_max must be positive")
    prev = kernels.get(backend).min_count_dp(*_kernel_args(sig), float(eps_max))
    cuts = [len(sig) - 1]
    while cuts[-1] > 0:
        cuts.append(int(prev[cuts[-1]]))
    return _from_cuts(sig, cuts[::-1])


def segment_fixed_count(sig: Signal, m: int, backend=None) -> Segmentation:
    """Exactly ``m`` segments minimizing the largest per-segment MSE."""
    m = int(m)
    if m < 1 or m + 1 > len(sig):
        raise ValueError(f"cannot split {len(sig)} samples into {m} segments")
    cuts, _ = kernels.get(backend).fixed_count_dp(*_kernel_args(sig), m)
    return _from_cuts(sig, cuts)
