"""
Ciclo global-local PUM/PD

Por cada paso de carga: resolución global con la grieta actual; en los
pasos de intercambio, caja PD alrededor de la punta, transferencia de
desplazamientos a la capa de borde, resolución local, extracción de la
grieta y actualización del enriquecimiento.
"""

import logging
import math
from concurrent.futures import Executor
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from app.crud.crack_csv import write_field_snapshot
from app.exceptions import AppException, CoupledRunError, InvalidParameterError
from app.schemas.config import RunConfig
from app.schemas.coupling import BoxPolicy, CouplingSchedule, RunReport, StepDiagnostics
from app.schemas.geometry import CaseSpec, CrackPath, DomainSpec, PDBox
from app.schemas.material import HorizonGeometry, MaterialParams
from app.services.coupling.base import GlobalSolver, LocalSolver
from app.services.coupling.box_policy import adapt_box, make_initial_box
from app.services.crack_extraction import centerline, iso_contour, resample_damage
from app.services.geometry import build_case, build_domain
from app.services.global_solver import (
    GlobalSolution,
    GlobalSystem,
    assemble_system,
    beam_boundary_conditions,
    build_cover,
    enrich_cracked_patches,
    evaluate_displacement,
    sample_displacement,
)
from app.services.material import build_material
from app.services.pd_solver import PDState, generate_nodes, peak_stretch_ratio, run_local
from app.utils.geometry import signed_side

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════
# TRANSFERENCIA GLOBAL -> LOCAL
# ═══════════════════════════════════════════════════════════

def _evaluate_on_nodes(solution: GlobalSolution, pts: np.ndarray) -> np.ndarray:
    """Evalúa con el lado de la grieta en que queda cada punto"""
    if len(pts) == 0:
        return np.zeros((0, 2))
    hint = None
    if solution.crack is not None:
        sign, _ = signed_side(pts, solution.crack.as_array())
        hint = np.where(sign == 0.0, 1.0, sign)
    return evaluate_displacement(solution, pts, side_hint=hint)


def transfer_global_to_pd(solution: GlobalSolution, state: PDState) -> np.ndarray:
    """
    Desplazamiento global evaluado en los nodos de la capa de borde

    Los nodos junto a la grieta se evalúan con el lado en que quedan
    respecto de la polilínea.

    Returns:
        Objetivos (n_capa, 2) en el orden de state.layer_indices
    """
    return _evaluate_on_nodes(solution, state.positions[state.layer_indices])


def global_field_on_nodes(solution: GlobalSolution, state: PDState) -> np.ndarray:
    """Desplazamiento global en todos los nodos de la caja (n_nodos, 2)"""
    return _evaluate_on_nodes(solution, state.positions)


# ═══════════════════════════════════════════════════════════
# IMPLEMENTACIONES DE LOS SOLVERS
# ═══════════════════════════════════════════════════════════

class PUMGlobalSolver(GlobalSolver):
    """
    Solver PUM con caché del sistema factorizado por grieta

    El problema es lineal en la carga: se ensambla una vez por trayectoria
    y cada factor de carga solo escala el lado derecho, multiplicado por
    load_scale.
    """

    def __init__(
        self,
        domain: DomainSpec,
        material: MaterialParams,
        h_pum: float,
        force: float,
        alpha: float = 1.3,
        gauss_order: int = 4,
        max_subdivision: int = 6,
        supports: str = "pin-roller",
        penalty_factor: float = 1e6,
        executor: Optional[Executor] = None,
        load_scale: float = 1.0,
    ):
        self.domain = domain
        self.material = material
        self.load_scale = load_scale
        self.gauss_order = gauss_order
        self.max_subdivision = max_subdivision
        self.executor = executor
        self.cover = build_cover(domain, h_pum, alpha)
        self.bcs = beam_boundary_conditions(domain, force, h_pum, supports, penalty_factor)
        self._cache: Optional[Tuple[Tuple, GlobalSystem]] = None
        self.assemblies = 0

    def system(self, crack: CrackPath) -> GlobalSystem:
        if self._cache is not None and self._cache[0] == crack.points:
            return self._cache[1]
        spaces = enrich_cracked_patches(self.cover, crack)
        system = assemble_system(
            self.cover, spaces, self.material, self.bcs,
            self.gauss_order, self.max_subdivision, self.executor
        )
        self.assemblies += 1
        self._cache = (crack.points, system)
        return system

    def solve(self, crack: CrackPath, load_factor: float) -> GlobalSolution:
        return self.system(crack).solve(load_factor, self.load_scale)

    def layer_targets(self, solution: GlobalSolution, state: PDState) -> np.ndarray:
        return transfer_global_to_pd(solution, state)

    def node_field(self, solution: GlobalSolution, state: PDState) -> np.ndarray:
        return global_field_on_nodes(solution, state)


class PDLocalSolver(LocalSolver):
    """Solver peridinámico con extracción de grieta por iso-contorno"""

    def __init__(
        self,
        domain: DomainSpec,
        material: MaterialParams,
        horizon: HorizonGeometry,
        steps: int,
        dt: float,
        threshold: float = 0.35,
        grid_spacing: Optional[float] = None,
        damping: float = 0.0,
        executor: Optional[Executor] = None,
        n_blocks: int = 1,
        snapshot_every: int = 0,
        snapshot_dir: Optional[Path] = None,
    ):
        self.domain = domain
        self.material = material
        self.horizon = horizon
        self.steps = steps
        self.dt = dt
        self.threshold = threshold
        self.grid_spacing = grid_spacing
        self.damping = damping
        self.executor = executor
        self.n_blocks = n_blocks
        self.snapshot_every = snapshot_every
        self.snapshot_dir = snapshot_dir
        self.solves = 0

    def build(self, box: PDBox, crack: CrackPath) -> PDState:
        return generate_nodes(box, self.domain, crack)

    def run(self, state: PDState, targets: np.ndarray) -> PDState:
        state.targets = np.asarray(targets, dtype=float).reshape(-1, 2)
        self.solves += 1
        destino = None
        if self.snapshot_every and self.snapshot_dir is not None:
            destino = Path(self.snapshot_dir) / f"local_{self.solves:03d}"
        state, _ = run_local(
            state, self.material, self.horizon, self.steps, self.dt,
            damping=self.damping, executor=self.executor, n_blocks=self.n_blocks,
            snapshot_every=self.snapshot_every, snapshot_dir=destino,
        )
        return state

    def extract(self, state: PDState, crack: CrackPath) -> CrackPath:
        h_pd = state.box.h_pd
        grid = resample_damage(state, self.grid_spacing or 2.0 * h_pd)
        contours = iso_contour(grid, self.threshold)
        return centerline(contours, crack, grid, self.threshold, self.horizon.delta, h_pd)


# ═══════════════════════════════════════════════════════════
# CALIBRACIÓN DE LA CARGA
# ═══════════════════════════════════════════════════════════

def calibrate_load_scale(
    global_solver: PUMGlobalSolver,
    local_solver: PDLocalSolver,
    domain: DomainSpec,
    policy: BoxPolicy,
    target_ratio: float
) -> float:
    """
    Escala de carga con |S| / S_c = target_ratio cerca de la punta inicial

    Se mide el campo global de la carga completa sobre la red de la caja
    inicial, en los enlaces con punto medio a menos de delta de la punta.
    Fija global_solver.load_scale y la devuelve.

    Raises:
        InvalidParameterError: si el campo no estira ningún enlace junto a la punta
    """
    crack = domain.initial_crack
    box = make_initial_box(crack, policy, domain)
    state = local_solver.build(box, crack)

    global_solver.load_scale = 1.0
    campo = global_solver.node_field(global_solver.solve(crack, 1.0), state)
    ratio = peak_stretch_ratio(state, local_solver.material, campo, crack.tip, policy.delta)
    if not ratio > 0:
        raise InvalidParameterError("|S|/S_c en la punta", ratio)

    escala = target_ratio / ratio
    global_solver.load_scale = escala

    en_caja = escala * peak_stretch_ratio(state, local_solver.material, campo)
    if en_caja > target_ratio * (1.0 + 1e-9):
        logger.warning(
            f"⚠️  |S|/S_c llega a {en_caja:.3g} lejos de la punta (objetivo {target_ratio:.3g})"
        )
    logger.info(
        f"⚖️  Escala de carga {escala:.4g}: |S|/S_c en la punta {ratio:.4g} -> {target_ratio:.4g}"
    )
    return escala


# ═══════════════════════════════════════════════════════════
# SERVICIO DE CORRIDA ACOPLADA
# ═══════════════════════════════════════════════════════════

class CoupledRunService:
    """
    Servicio del ciclo global-local

    Lleva la cuenta de resoluciones locales, intercambios, cajas recortadas
    y advertencias, y genera el reporte de la corrida.
    """

    def __init__(
        self,
        domain: DomainSpec,
        schedule: CouplingSchedule,
        policy: BoxPolicy,
        global_solver: GlobalSolver,
        local_solver: LocalSolver,
        threshold: float = 0.35,
        target_stretch_ratio: Optional[float] = None,
        field_spacing: Optional[float] = None,
        output_dir: Optional[Path] = None,
    ):
        self.domain = domain
        self.schedule = schedule
        self.policy = policy
        self.global_solver = global_solver
        self.local_solver = local_solver
        self.threshold = threshold
        self.target_stretch_ratio = target_stretch_ratio
        self.field_spacing = field_spacing
        self.output_dir = None if output_dir is None else Path(output_dir)
        self.field_files: List[Path] = []

        self.n_local_solves = 0
        self.n_exchange_steps = 0
        self.clipped_boxes = 0
        self.diagnostics: List[StepDiagnostics] = []
        self.boxes: List[PDBox] = []
        self.advertencias: List[Dict[str, Any]] = []
        self.report: Optional[RunReport] = None
        self._last_tip = None

    def _stage(self, step: int, stage: str, fn, *args, **kwargs):
        """Ejecuta un subpaso y envuelve cualquier error con el contexto del paso"""
        try:
            return fn(*args, **kwargs)
        except CoupledRunError:
            raise
        except (AppException, ValueError, ArithmeticError, RuntimeError) as exc:
            logger.error(f"❌ Paso {step}, etapa {stage}: {exc}")
            raise CoupledRunError(step, stage, exc) from exc

    def _local_cycle(self, step: int, load_factor: float, crack: CrackPath, box: PDBox,
                     solution: Any) -> Tuple[CrackPath, PDState, int]:
        """Una o varias resoluciones locales según el esquema interno"""
        iteraciones = 1 if self.schedule.inner_scheme == "single-pass" else self.schedule.max_inner_iterations
        state = None
        solves = 0
        for it in range(iteraciones):
            state = self._stage(step, "pd-build", self.local_solver.build, box, crack)
            targets = self._stage(step, "transfer", self.global_solver.layer_targets, solution, state)
            campo = self._stage(step, "transfer", self.global_solver.node_field, solution, state)
            if campo is not None:
                state.ramp_field = campo
            state = self._stage(step, "pd-solve", self.local_solver.run, state, targets)
            solves += 1
            nueva = self._stage(step, "extract", self.local_solver.extract, state, crack)
            avance = float(np.hypot(nueva.tip[0] - crack.tip[0], nueva.tip[1] - crack.tip[1]))
            crack = nueva
            if self.schedule.inner_scheme == "single-pass" or avance < self.schedule.inner_advance_tol:
                break
            logger.info(f"🔁 Esquema B, iteración {it + 1}: avance de punta {avance:.3g} m")
            solution = self._stage(step, "global", self.global_solver.solve, crack, load_factor)
        else:
            if self.schedule.inner_scheme == "scheme-B":
                self.advertencias.append({
                    "tipo": "esquema B sin converger",
                    "paso": step,
                })
        return crack, state, solves

    def run(self) -> RunReport:
        """
        Recorre todos los pasos de carga

        Returns:
            Reporte con la trayectoria final y el diagnóstico por paso

        Raises:
            CoupledRunError: Error de cualquier subpaso, con paso y etapa
        """
        crack = self.domain.initial_crack
        box: Optional[PDBox] = None
        state: Optional[PDState] = None
        n = self.schedule.n_load_steps

        logger.info(
            f"🚀 Corrida acoplada: {n} pasos de carga, intercambio cada "
            f"{self.schedule.exchange_every} ({self.schedule.inner_scheme})"
        )

        if self.target_stretch_ratio is not None:
            self._stage(
                0, "calibration", calibrate_load_scale,
                self.global_solver, self.local_solver, self.domain, self.policy,
                self.target_stretch_ratio,
            )

        for step in range(1, n + 1):
            load_factor = step / n
            solution = self._stage(step, "global", self.global_solver.solve, crack, load_factor)
            if self.field_spacing and self.output_dir is not None:
                self._stage(step, "snapshot", self._write_field, step, solution)
            solves = 0
            max_damage = 0.0

            if self.schedule.is_exchange_step(step):
                self.n_exchange_steps += 1
                previous_tip = crack.tip
                if box is None:
                    box = self._stage(step, "box", make_initial_box, crack, self.policy, self.domain)
                else:
                    box = self._stage(
                        step, "box", adapt_box, box, crack, self.policy, self.domain,
                        previous_tip=self._last_tip,
                        positions=None if state is None else state.positions,
                        damage=None if state is None else state.damage,
                        threshold=self.threshold,
                    )
                if box.clipped:
                    self.clipped_boxes += 1
                    self.advertencias.append({"tipo": "caja recortada", "paso": step})
                self.boxes.append(box)

                crack, state, solves = self._local_cycle(step, load_factor, crack, box, solution)
                self.n_local_solves += solves
                max_damage = float(state.damage.max()) if state.n_nodes else 0.0
                self._last_tip = previous_tip

                if crack.tip != previous_tip:
                    logger.info(
                        f"📈 Paso {step}: punta ({crack.tip[0]:.5f}, {crack.tip[1]:.5f}), "
                        f"longitud {crack.arc_length:.4g} m"
                    )

            caja = box.rect.as_tuple() if box is not None else (math.nan,) * 4
            self.diagnostics.append(StepDiagnostics(
                step=step,
                load_factor=load_factor,
                tip_x=crack.tip[0],
                tip_y=crack.tip[1],
                box_xmin=caja[0], box_ymin=caja[1], box_xmax=caja[2], box_ymax=caja[3],
                max_damage=min(max(max_damage, 0.0), 1.0),
                local_solves=solves,
            ))

        self.report = RunReport(
            final_crack=crack,
            initial_crack=self.domain.initial_crack,
            diagnostics=self.diagnostics,
            boxes=self.boxes,
            n_local_solves=self.n_local_solves,
            n_exchange_steps=self.n_exchange_steps,
            clipped_boxes=self.clipped_boxes,
            load_scale=self.global_solver.load_scale,
        )
        if not self.report.grew:
            logger.warning("⚠️  La grieta no creció en ningún paso de carga")
        logger.info(f"✅ Corrida terminada: {self.n_local_solves} resoluciones locales")
        return self.report

    def _write_field(self, step: int, solution: GlobalSolution) -> Path:
        """Instantánea x,y,ux,uy del campo global del paso"""
        pts, disp = sample_displacement(solution, self.field_spacing)
        destino = write_field_snapshot(pts, disp, self.output_dir / "campo" / f"campo_{step:03d}.csv")
        self.field_files.append(destino)
        return destino

    def generate_report(self) -> str:
        """Genera un reporte legible de la corrida"""
        report = self.report
        inicial = self.domain.initial_crack
        final = report.final_crack if report is not None else inicial
        texto = f"""
╔════════════════════════════════════════════════════════════╗
║           REPORTE DE CORRIDA ACOPLADA PUM/PD               ║
╚════════════════════════════════════════════════════════════╝

📊 RESUMEN:
   • Pasos de carga:           {self.schedule.n_load_steps}
   • Pasos de intercambio:     {self.n_exchange_steps}
   • Resoluciones locales:     {self.n_local_solves}
   • Cajas recortadas:         {self.clipped_boxes}
   • Escala de carga:          {self.global_solver.load_scale:.6g}
   • Punta inicial:            ({inicial.tip[0]:.5f}, {inicial.tip[1]:.5f})
   • Punta final:              ({final.tip[0]:.5f}, {final.tip[1]:.5f})
   • Longitud de grieta:       {inicial.arc_length:.5f} -> {final.arc_length:.5f} m
"""
        if report is not None and report.reference_distance is not None:
            texto += f"   • Fréchet a la referencia:  {report.reference_distance:.5f} m\n"

        if self.advertencias:
            texto += "\n⚠️  ADVERTENCIAS:\n"
            for adv in self.advertencias[:10]:
                texto += f"   • {adv.get('tipo')}: paso {adv.get('paso')}\n"
            if len(self.advertencias) > 10:
                texto += f"   ... y {len(self.advertencias) - 10} advertencias más\n"
        return texto


# ═══════════════════════════════════════════════════════════
# CONSTRUCCIÓN DESDE LA CONFIGURACIÓN
# ═══════════════════════════════════════════════════════════

def domain_from_config(config: RunConfig) -> DomainSpec:
    """Viga del caso configurado (I, II, III o custom)"""
    c = config.case
    thickness = config.material.thickness
    if c.case_id == "custom":
        spec = CaseSpec(case_id="custom", a=c.a, b=c.b, n_holes=c.n_holes or 0)
        return build_domain(spec, thickness)
    return build_case(c.case_id, thickness)


def build_solvers(
    config: RunConfig,
    executor: Optional[Executor] = None,
    n_blocks: int = 1,
    output_dir: Optional[Path] = None,
) -> Tuple[DomainSpec, PUMGlobalSolver, PDLocalSolver]:
    """Viga, material y solvers de la configuración"""
    domain = domain_from_config(config)
    m, d, s = config.material, config.discretization, config.solver
    material = build_material(m.E, m.Gc, m.rho, m.nu)
    horizon = HorizonGeometry(delta=config.delta)

    global_solver = PUMGlobalSolver(
        domain, material, d.h_pum, d.force,
        alpha=s.pu_alpha, gauss_order=s.gauss_order, max_subdivision=s.max_subdivision,
        supports=s.supports, penalty_factor=s.penalty_factor, executor=executor,
        load_scale=d.load_scale,
    )
    snapshots = None
    if config.output.snapshot_every and output_dir is not None:
        snapshots = Path(output_dir) / "snapshots"
    local_solver = PDLocalSolver(
        domain, material, horizon, d.t_n, d.t_s,
        threshold=config.extraction.damage_threshold,
        grid_spacing=config.grid_spacing,
        damping=s.damping, executor=executor, n_blocks=n_blocks,
        snapshot_every=config.output.snapshot_every, snapshot_dir=snapshots,
    )
    return domain, global_solver, local_solver


def build_service(
    config: RunConfig,
    executor: Optional[Executor] = None,
    n_blocks: int = 1,
    output_dir: Optional[Path] = None,
) -> CoupledRunService:
    """Ensambla solvers y políticas a partir de la configuración"""
    domain, global_solver, local_solver = build_solvers(config, executor, n_blocks, output_dir)
    return CoupledRunService(
        domain=domain,
        schedule=config.coupling_schedule(),
        policy=config.box_policy(),
        global_solver=global_solver,
        local_solver=local_solver,
        threshold=config.extraction.damage_threshold,
        target_stretch_ratio=config.discretization.target_stretch_ratio,
        field_spacing=config.output.field_spacing,
        output_dir=output_dir,
    )


def run_coupled(
    config: RunConfig,
    executor: Optional[Executor] = None,
    n_blocks: int = 1,
    output_dir: Optional[Path] = None,
) -> Tuple[CrackPath, RunReport]:
    """
    Corrida acoplada completa

    Returns:
        (trayectoria final, reporte)
    """
    logger.info(f"🚀 {config.describe()}")
    service = build_service(config, executor, n_blocks, output_dir)
    report = service.run()
    return report.final_crack, report
