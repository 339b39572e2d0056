# ===========================================================================
# File: app/services/modal_service.py
# ===========================================================================
from typing import Callable, Literal, Optional, Tuple
import numpy as np

from app.core.config import settings, logger
from app.core.exceptions import CutoffWavenumber, DimensionMismatch, SourceInsideDomain
from app.models.modal import (
    LongitudinalSpectrum, ModalBasis, ModalField, TraceQuantity, WallSide,
)


class ModalService:
    def build_modal(self, H: float, k: float, J: int) -> Tuple[ModalBasis, LongitudinalSpectrum]:
        if H <= 0 or k <= 0 or J < 1:
            raise ValueError(f"build_modal needs H > 0, k > 0, J >= 1 (got H={H}, k={k}, J={J})")
        j = np.arange(J)
        k_j = j * np.pi / H
        gap = np.abs(k - k_j)
        tol = settings.CUTOFF_RTOL * k
        if np.any(gap < tol):
            bad = int(np.argmin(gap))
            raise CutoffWavenumber(f"k={k} is within {tol:.3g} of the cutoff k_{bad}={k_j[bad]}")

        amplitudes = np.full(J, np.sqrt(2.0 / H))
        amplitudes[0] = 1.0 / np.sqrt(H)

        # Im(beta) >= 0 branch: real for propagating modes, +i|.| for evanescent ones
        propagating = k_j < k
        beta = np.where(
            propagating,
            np.sqrt(np.abs(k ** 2 - k_j ** 2)) + 0j,
            1j * np.sqrt(np.abs(k_j ** 2 - k ** 2)),
        )
        n_pr = int(np.flatnonzero(propagating).max())
        if n_pr == J - 1:
            logger.debug(f"All {J} retained modes propagate at k={k}; N_pr is capped by J")

        basis = ModalBasis(H=H, count=J, k_j=k_j, amplitudes=amplitudes)
        spectrum = LongitudinalSpectrum(k=k, beta=beta, n_pr=n_pr)
        logger.debug(f"Modal basis built: H={H}, k={k}, J={J}, N_pr={n_pr}")
        return basis, spectrum

    def mode_count(self, M: int, N_f: int = 0) -> int:
        return max(M, N_f + 1) + settings.EXTRA_MODES

    def default_truncation(self, spectrum: LongitudinalSpectrum) -> int:
        return spectrum.n_pr + settings.DEFAULT_EVANESCENT_MODES

    def ntd_coeffs(
        self, f: np.ndarray, spectrum: LongitudinalSpectrum, adjoint: bool = False
    ) -> np.ndarray:
        f = np.asarray(f, dtype=complex)
        if f.shape[-1] > spectrum.count:
            raise DimensionMismatch(
                f"{f.shape[-1]} coefficients but only {spectrum.count} longitudinal wavenumbers"
            )
        beta = spectrum.beta[:f.shape[-1]]
        if adjoint:
            return 1j / np.conj(beta) * f
        return -1j / beta * f

    def ntd_symbol(self, spectrum: LongitudinalSpectrum, M: int) -> np.ndarray:
        """-i / beta_j for j < M."""
        return self.ntd_coeffs(np.ones(M, dtype=complex), spectrum)

    def guided_mode(
        self, j: int, sign: Literal[-1, 1], basis: ModalBasis, spectrum: LongitudinalSpectrum
    ) -> ModalField:
        if not 0 <= j < spectrum.count:
            raise DimensionMismatch(f"mode index {j} outside 0..{spectrum.count - 1}")
        amplitudes = np.zeros(j + 1, dtype=complex)
        amplitudes[j] = 1.0
        return ModalField(
            basis=basis, spectrum=spectrum, amplitudes=amplitudes,
            signs=np.full(j + 1, sign), label=f"g_{j}{'+' if sign > 0 else '-'}",
        )

    def mode_trace(
        self,
        j: int,
        sign: Literal[-1, 1],
        basis: ModalBasis,
        spectrum: LongitudinalSpectrum,
        R: float,
        wall: WallSide,
        quantity: TraceQuantity = "value",
    ) -> Tuple[Callable[[np.ndarray], np.ndarray], np.ndarray]:
        """Trace of g_j^sign (or of its outward normal derivative) on x1 = wall*R.

        Returns the trace as a function of the ordinate and its coefficient
        vector over all modes of the basis (a single non-zero entry).
        """
        mode = self.guided_mode(j, sign, basis, spectrum)
        value, normal = mode.wall_coefficients(R, wall)
        coefficient = value[j] if quantity == "value" else normal[j]
        coefficients = np.zeros(basis.count, dtype=complex)
        coefficients[j] = coefficient

        def trace(y: np.ndarray) -> np.ndarray:
            return coefficient * basis.theta(y, j + 1)[:, j]

        return trace, coefficients

    def fundamental_solution(
        self,
        y: Tuple[float, float],
        N_f: int,
        basis: ModalBasis,
        spectrum: LongitudinalSpectrum,
        x_range: Optional[Tuple[float, float]] = None,
    ) -> ModalField:
        """Truncated waveguide Green's function with N_f + 1 terms.

        G(x) = -sum_{j<=N_f} exp(i beta_j |x1 - y1|) / (2 i beta_j) theta_j(x^) theta_j(y^)
        """
        y1, y_hat = y
        if N_f + 1 > spectrum.count:
            raise DimensionMismatch(f"N_f={N_f} needs {N_f + 1} modes, spectrum has {spectrum.count}")
        if x_range is not None:
            lo, hi = x_range
            if lo <= y1 <= hi:
                raise SourceInsideDomain(f"source y1={y1} lies inside the evaluation range [{lo}, {hi}]")
            side = 1 if y1 < lo else -1
        else:
            side = 1
        J = N_f + 1
        beta = spectrum.beta[:J]
        theta_y = basis.theta(np.array([y_hat]), J)[0]
        amplitudes = -np.exp(-1j * side * beta * y1) / (2j * beta) * theta_y
        if np.max(np.abs(amplitudes)) > settings.MAGNITUDE_WARN:
            logger.warning("Green's function amplitudes exceed the magnitude warning level")
        return ModalField(
            basis=basis, spectrum=spectrum, amplitudes=amplitudes,
            signs=np.full(J, side), source_x1=y1, label="green",
        )


modal_service = ModalService()
