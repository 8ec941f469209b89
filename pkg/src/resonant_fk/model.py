"""Model bundle: potential V on T^d, medium frequencies, and the chosen resonance."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fourier import TrigSeries
from .resonance import (TOL_RES, IntrinsicData, MediumFrequency, Resonance, find_resonance,
                        intrinsic_data, omega_from_resonance)

# Amplitude of the bundled example in the 1-periodic convention: the
# 2*pi-periodic potential cos(x) rescales to cos(2*pi*theta) / (2*pi)^2.
EXAMPLE_AMPLITUDE = 1.0 / (2.0 * math.pi) ** 2


@dataclass(frozen=True)
class FKModel:
    V: TrigSeries
    alpha: MediumFrequency
    resonance: Resonance
    intrinsic: IntrinsicData
    spacing: float = 0.0  # the `a` of the formal energy; cancels in equilibria

    @classmethod
    def build(cls, V: TrigSeries, alpha, k=None, m=None, omega=None, K_box: int = 3, M_box: int = 3,
              tol: float = TOL_RES, spacing: float = 0.0) -> "FKModel":
        """Resolve the resonance from (k, m) or detect it from omega."""
        alpha = alpha if isinstance(alpha, MediumFrequency) else MediumFrequency(alpha)
        if V.dim != alpha.d:
            raise ValueError(f"potential of dim {V.dim} for d={alpha.d}")
        if k is not None:
            if m is None:
                raise ValueError("k given without m")
            res = Resonance(tuple(int(x) for x in k), int(m), omega_from_resonance(k, m, alpha, tol))
            if omega is not None and abs(omega - res.omega) > tol:
                raise ValueError(f"omega={omega} disagrees with m/(k.alpha)={res.omega}")
        elif omega is not None:
            res = find_resonance(alpha, omega, K_box, M_box, tol)
            if res is None:
                raise ValueError(f"omega={omega} has no resonance in the scan box")
        else:
            raise ValueError("need (k, m) or omega")
        return cls(V, alpha, res, intrinsic_data(res, alpha, tol=tol), spacing)

    @property
    def d(self) -> int:
        return self.alpha.d

    @property
    def omega(self) -> float:
        return self.resonance.omega

    @property
    def Omega(self) -> np.ndarray:
        return self.intrinsic.Omega

    @property
    def beta(self) -> np.ndarray:
        return self.intrinsic.beta


def example_potential(A: float = EXAMPLE_AMPLITUDE, C: float = EXAMPLE_AMPLITUDE) -> TrigSeries:
    """``A cos(2 pi theta_1) + C cos(2 pi (theta_1 + theta_2))``."""
    return TrigSeries.cosine((1, 0), A, cutoff=(1, 1)) + TrigSeries.cosine((1, 1), C, cutoff=(1, 1))


def example_model(A: float = EXAMPLE_AMPLITUDE, C: float = EXAMPLE_AMPLITUDE) -> FKModel:
    """alpha = (1, sqrt 2) with the resonance k = (1, 1), m = 1, so omega = sqrt 2 - 1."""
    return FKModel.build(example_potential(A, C), (1.0, math.sqrt(2.0)), k=(1, 1), m=1)
