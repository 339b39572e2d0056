# ===========================================================================
# File: app/services/experiment_service.py
# ===========================================================================
from typing import Any, Callable, Dict, Hashable, Iterator, List, Optional, Sequence, Tuple
import time
import numpy as np

from app.core.config import logger
from app.core.exceptions import InsufficientData, TDGError
from app.models.experiment import (
    ExperimentConfig, GammaSummary, RateSummary, ResultRow, RunSummary,
)
from app.models.mesh import Box, Mesh
from app.models.modal import LongitudinalSpectrum, ModalBasis, ModalField
from app.models.solution import SolutionField
from app.models.system import TDGSystem
from app.services.assembly_service import assembly_service
from app.services.basis_service import basis_service
from app.services.mesh_service import mesh_service
from app.services.modal_service import modal_service
from app.services.solver_service import Reference, solver_service
from app.utils.helpers import group_by

# errors recorded per row instead of aborting the sweep
ROW_ERRORS = (TDGError, np.linalg.LinAlgError, FloatingPointError, ValueError)


class ExperimentService:
    def build_mesh(self, config: ExperimentConfig, R: float, h: float) -> Mesh:
        if config.mesh == "scatterer":
            return mesh_service.generate_scatterer_mesh(
                R, config.H, h, Box(x0=config.box[0], x1=config.box[1], y0=config.box[2], y1=config.box[3]),
                config.n_inside, config.interior_factor,
            )
        if config.mesh == "layer":
            if config.refine_levels is None:
                _, mesh = mesh_service.levels_for_ratio(R, config.H, h, config.layer, config.edge_ratio)
                return mesh
            return mesh_service.generate_layer_refined(R, config.H, h, config.layer, config.refine_levels)
        return mesh_service.generate_uniform(R, config.H, h)

    def build_modal(self, config: ExperimentConfig, k: float) -> Tuple[ModalBasis, LongitudinalSpectrum]:
        J = modal_service.mode_count(max(max(config.M), config.mode + 1), config.N_f)
        return modal_service.build_modal(config.H, k, J)

    def incident_field(
        self, config: ExperimentConfig, basis: ModalBasis, spectrum: LongitudinalSpectrum, R: float
    ) -> ModalField:
        if config.incident == "fundamental":
            return modal_service.fundamental_solution(
                config.source_point(R), config.N_f, basis, spectrum, x_range=(-R, R)
            )
        return modal_service.guided_mode(config.mode, 1, basis, spectrum)

    def _modal_data(
        self, config: ExperimentConfig, k: float, R: float
    ) -> Tuple[ModalBasis, LongitudinalSpectrum, ModalField]:
        basis, spectrum = self.build_modal(config, k)
        return basis, spectrum, self.incident_field(config, basis, spectrum, R)

    def assemble(
        self,
        mesh: Mesh,
        k: float,
        n_p: int,
        M: int,
        gamma: float,
        basis: ModalBasis,
        spectrum: LongitudinalSpectrum,
        incident: ModalField,
    ) -> TDGSystem:
        space = basis_service.build_space(mesh, k, n_p)
        params = assembly_service.flux_parameters(mesh, gamma)
        return assembly_service.assemble(mesh, space, basis, spectrum, params, M, incident)

    def tuples(self, config: ExperimentConfig) -> Iterator[Tuple[float, float, int, int, float]]:
        """Sweep tuples (k, h, Np, M, gamma) in config order."""
        for k in config.k:
            for h in config.h:
                for n_p in config.Np:
                    for M in config.M:
                        for gamma in config.gamma:
                            yield k, h, n_p, M, gamma

    def _overkill(
        self,
        config: ExperimentConfig,
        k: float,
        M: int,
        gamma: float,
        basis: ModalBasis,
        spectrum: LongitudinalSpectrum,
        incident: ModalField,
    ) -> SolutionField:
        R = config.domain_length(k)
        h = min(config.h) / 2.0
        n_p = max(config.Np) + config.overkill_extra_np
        logger.info(f"Overkill reference: k={k}, h={h:.4g}, Np={n_p}, M={M}, gamma={gamma}")
        mesh = self.build_mesh(config, R, h)
        system = self.assemble(mesh, k, n_p, M, gamma, basis, spectrum, incident)
        return solver_service.solve(system)

    def _cached(self, cache: Dict[Hashable, Any], key: Hashable, build: Callable[[], Any]) -> Any:
        """Build once per key; a failed build is remembered and re-raised for every row sharing it."""
        if key not in cache:
            try:
                cache[key] = build()
            except ROW_ERRORS as exc:
                cache[key] = exc
        if isinstance(cache[key], Exception):
            raise cache[key]
        return cache[key]

    def run(self, config: ExperimentConfig) -> List[ResultRow]:
        rows: List[ResultRow] = []
        meshes: Dict[Hashable, Any] = {}
        modal: Dict[Hashable, Any] = {}
        references: Dict[Hashable, Any] = {}

        for k, h, n_p, M, gamma in self.tuples(config):
            R = config.domain_length(k)
            row = ResultRow(experiment=config.experiment, k=k, R=R, H=config.H, h=h, Np=n_p, M=M, gamma=gamma)
            started = time.perf_counter()
            try:
                basis, spectrum, incident = self._cached(modal, k, lambda: self._modal_data(config, k, R))
                mesh = self._cached(meshes, (k, h), lambda: self.build_mesh(config, R, h))

                reference: Reference = incident
                if config.reference == "overkill":
                    overkill = self._cached(
                        references, (k, M, gamma),
                        lambda: self._overkill(config, k, M, gamma, basis, spectrum, incident),
                    )
                    reference = solver_service.as_reference(overkill)

                system = self.assemble(mesh, k, n_p, M, gamma, basis, spectrum, incident)
                field = solver_service.solve(system)
                error = solver_service.relative_l2_error(field, reference)
                row = row.model_copy(update=dict(
                    dofs=system.size, rel_l2_error=error, residual=field.residual,
                    cond_indicator=field.cond_indicator,
                ))
                logger.info(
                    f"[{config.experiment}] k={k} h={h} Np={n_p} M={M} gamma={gamma}: "
                    f"dofs={system.size}, rel_l2_error={error:.3e}"
                )
            except ROW_ERRORS as exc:
                row = row.model_copy(update=dict(status=type(exc).__name__))
                logger.error(
                    f"[{config.experiment}] k={k} h={h} Np={n_p} M={M} gamma={gamma} failed: {exc}",
                    exc_info=not isinstance(exc, TDGError),
                )
            elapsed = time.perf_counter() - started if config.record_timing else 0.0
            rows.append(row.model_copy(update=dict(wall_seconds=elapsed)))

        failed = sum(not r.ok for r in rows)
        logger.info(f"Sweep finished: {len(rows)} rows, {failed} failed")
        return rows

    def fit_rate(self, rows: Sequence[ResultRow]) -> float:
        """Least-squares slope of log(error) against log(h)."""
        usable = [
            r for r in rows
            if r.ok and np.isfinite(r.rel_l2_error) and r.rel_l2_error > 0 and r.h > 0
        ]
        if len(usable) < 3:
            raise InsufficientData(f"need at least 3 usable rows to fit a rate, got {len(usable)}")
        log_h = np.log([r.h for r in usable])
        if np.ptp(log_h) == 0:
            raise InsufficientData("all rows share the same mesh size")
        slope, _ = np.polyfit(log_h, np.log([r.rel_l2_error for r in usable]), 1)
        return float(slope)

    def optimal_gamma(self, rows: Sequence[ResultRow]) -> List[GammaSummary]:
        """The gamma with the smallest error per (k, h, Np), ties going to the smaller gamma."""
        ok = [r for r in rows if r.ok and np.isfinite(r.rel_l2_error)]
        summaries = []
        for (k, h, n_p), group in group_by(ok, lambda r: (r.k, r.h, r.Np)).items():
            best = min(group, key=lambda r: (r.rel_l2_error, r.gamma))
            summaries.append(GammaSummary(k=k, h=h, Np=n_p, gamma_opt=best.gamma, rel_l2_error=best.rel_l2_error))
        return summaries

    def summarize(self, config: ExperimentConfig, rows: Sequence[ResultRow]) -> RunSummary:
        rates = []
        for (k, n_p, M, gamma), group in group_by(rows, lambda r: (r.k, r.Np, r.M, r.gamma)).items():
            try:
                slope = self.fit_rate(group)
            except InsufficientData:
                continue
            rates.append(RateSummary(k=k, Np=n_p, M=M, gamma=gamma, slope=slope, points=sum(r.ok for r in group)))
        return RunSummary(
            experiment=config.experiment,
            rows=len(rows),
            failed=sum(not r.ok for r in rows),
            rates=rates,
            gamma_opt=self.optimal_gamma(rows),
        )

    def solve_first(
        self, config: ExperimentConfig
    ) -> Tuple[TDGSystem, SolutionField, Optional[Reference]]:
        """Solve the first sweep tuple; used by the field command."""
        k, h, n_p, M, gamma = next(self.tuples(config))
        R = config.domain_length(k)
        basis, spectrum = self.build_modal(config, k)
        incident = self.incident_field(config, basis, spectrum, R)
        mesh = self.build_mesh(config, R, h)
        system = self.assemble(mesh, k, n_p, M, gamma, basis, spectrum, incident)
        field = solver_service.solve(system)
        reference: Optional[Reference] = incident
        if config.reference == "overkill":
            reference = solver_service.as_reference(
                self._overkill(config, k, M, gamma, basis, spectrum, incident)
            )
        return system, field, reference


experiment_service = ExperimentService()
