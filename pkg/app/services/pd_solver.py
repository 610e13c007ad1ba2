"""
Solver peridinámico local
Discretización sin malla de una caja PD e integración explícita con capa
de borde de Dirichlet en rampa
"""

import math
import logging
from concurrent.futures import Executor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from app.crud.crack_csv import write_pd_snapshot
from app.exceptions import DivergenceError, EmptyDomainError, InvalidScheduleError
from app.schemas.geometry import CrackPath, DomainSpec, PDBox
from app.schemas.material import Bond, HorizonGeometry, MaterialParams
from app.services.pd_model import (
    bond_stretch_array,
    critical_stretch_array,
    pair_force_array,
    stable_time_step,
)
from app.utils.geometry import segments_cross_polyline, segments_hit_circle

logger = logging.getLogger(__name__)


# Distancias dentro de esta fracción relativa de delta cuentan como "igual a delta"
HORIZON_RTOL = 1e-10


def within_horizon(r: np.ndarray, delta: float) -> np.ndarray:
    """Criterio estricto 0 < r < delta, robusto al redondeo de la red"""
    return (r > 0.0) & (r < delta * (1.0 - HORIZON_RTOL))


# ═══════════════════════════════════════════════════════════
# ESTADO
# ═══════════════════════════════════════════════════════════

@dataclass
class PDState:
    """
    Nube de nodos de una caja PD

    Los enlaces se guardan dirigidos (i, j) y ordenados por (i, j); cada par
    aparece en ambos sentidos y offsets[i]:offsets[i+1] es el tramo del nodo i.
    ramp_field, si se asigna, es el campo global en todos los nodos: los
    nodos libres arrancan con la velocidad de rampa ramp_field / T.
    """

    positions: np.ndarray
    volume: np.ndarray
    bond_i: np.ndarray
    bond_j: np.ndarray
    bond_dx: np.ndarray
    bond_length: np.ndarray
    critical: np.ndarray
    offsets: np.ndarray
    boundary_layer: np.ndarray
    box: PDBox
    crack: CrackPath
    displacement: np.ndarray = None
    velocity: np.ndarray = None
    acceleration: np.ndarray = None
    body_force: np.ndarray = None
    softened: np.ndarray = None
    targets: np.ndarray = None
    ramp_field: Optional[np.ndarray] = None
    time: float = 0.0
    steps_taken: int = 0

    def __post_init__(self):
        n = len(self.positions)
        for name in ("displacement", "velocity", "acceleration", "body_force"):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros((n, 2)))
        if self.softened is None:
            self.softened = np.zeros(len(self.bond_i), dtype=bool)
        if self.targets is None:
            self.targets = np.zeros((int(self.boundary_layer.sum()), 2))

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    @property
    def n_bonds(self) -> int:
        return len(self.bond_i)

    @property
    def layer_indices(self) -> np.ndarray:
        return np.flatnonzero(self.boundary_layer)

    @property
    def bond_counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def prescribed_bonds(self) -> np.ndarray:
        """Enlaces con ambos extremos en la capa de borde (nunca se ablandan)"""
        return self.boundary_layer[self.bond_i] & self.boundary_layer[self.bond_j]

    @property
    def damage(self) -> np.ndarray:
        """Fracción de enlaces ablandados por nodo (0 en nodos aislados)"""
        counts = self.bond_counts
        soft = np.bincount(self.bond_i, weights=self.softened, minlength=self.n_nodes)
        return np.divide(soft, counts, out=np.zeros(self.n_nodes), where=counts > 0)

    def bonds_of(self, node: int) -> List[Bond]:
        """Enlaces del nodo como objetos Bond"""
        a, b = self.offsets[node], self.offsets[node + 1]
        return [
            Bond(dx=(float(dx[0]), float(dx[1])), length=float(L), softened=bool(s))
            for dx, L, s in zip(self.bond_dx[a:b], self.bond_length[a:b], self.softened[a:b])
        ]

    def copy(self) -> "PDState":
        return replace(
            self,
            displacement=self.displacement.copy(),
            velocity=self.velocity.copy(),
            acceleration=self.acceleration.copy(),
            body_force=self.body_force.copy(),
            softened=self.softened.copy(),
            targets=self.targets.copy(),
            ramp_field=None if self.ramp_field is None else self.ramp_field.copy(),
        )


# ═══════════════════════════════════════════════════════════
# VECINOS Y NODOS
# ═══════════════════════════════════════════════════════════

def build_neighbor_lists(positions: np.ndarray, delta: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Pares dirigidos (i, j) con 0 < |x_j - x_i| < delta por celdas de tamaño delta

    Returns:
        (bond_i, bond_j) ordenados lexicográficamente
    """
    pos = np.asarray(positions, dtype=float)
    if len(pos) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)

    cell = np.floor((pos - pos.min(axis=0)) / delta).astype(np.int64)
    ncy = int(cell[:, 1].max()) + 1
    key = cell[:, 0] * ncy + cell[:, 1]
    order = np.argsort(key, kind="stable")
    keys, starts, counts = np.unique(key[order], return_index=True, return_counts=True)
    lookup = {int(k): (int(s), int(c)) for k, s, c in zip(keys, starts, counts)}

    rows, cols = [], []
    for k, s, c in zip(keys.tolist(), starts.tolist(), counts.tolist()):
        cx, cy = divmod(k, ncy)
        members = order[s:s + c]
        vecinos = []
        for ox in (-1, 0, 1):
            for oy in (-1, 0, 1):
                if not 0 <= cy + oy < ncy:
                    continue
                hit = lookup.get((cx + ox) * ncy + cy + oy)
                if hit is not None:
                    vecinos.append(order[hit[0]:hit[0] + hit[1]])
        cand = np.concatenate(vecinos)
        d = pos[members][:, None, :] - pos[cand][None, :, :]
        r = np.hypot(d[..., 0], d[..., 1])
        ii, jj = np.nonzero(within_horizon(r, delta))
        rows.append(members[ii])
        cols.append(cand[jj])

    bond_i = np.concatenate(rows)
    bond_j = np.concatenate(cols)
    order = np.lexsort((bond_j, bond_i))
    return bond_i[order], bond_j[order]


def _lattice_axis(lo: float, hi: float, ref: float, h: float) -> np.ndarray:
    """Centros de celda ref + (k + 1/2) h dentro de [lo, hi)"""
    k0 = math.ceil((lo - ref) / h - 0.5)
    k1 = math.ceil((hi - ref) / h - 0.5)
    return ref + (np.arange(k0, k1) + 0.5) * h


def _bonds_blocked(
    p_i: np.ndarray,
    p_j: np.ndarray,
    crack: CrackPath,
    domain: DomainSpec
) -> np.ndarray:
    """Máscara de enlaces que cruzan la grieta o atraviesan un agujero"""
    blocked = np.zeros(len(p_i), dtype=bool)
    lo = np.minimum(p_i, p_j)
    hi = np.maximum(p_i, p_j)

    polyline = crack.as_array()
    for a, b in zip(polyline[:-1], polyline[1:]):
        near = np.flatnonzero(
            (hi[:, 0] >= min(a[0], b[0])) & (lo[:, 0] <= max(a[0], b[0]))
            & (hi[:, 1] >= min(a[1], b[1])) & (lo[:, 1] <= max(a[1], b[1]))
        )
        if near.size:
            blocked[near] |= segments_cross_polyline(p_i[near], p_j[near], np.array([a, b]))

    for hole in domain.holes:
        cx, cy = hole.center
        r = hole.radius
        near = np.flatnonzero(
            (hi[:, 0] >= cx - r) & (lo[:, 0] <= cx + r)
            & (hi[:, 1] >= cy - r) & (lo[:, 1] <= cy + r)
        )
        if near.size:
            blocked[near] |= segments_hit_circle(p_i[near], p_j[near], hole.center, r)

    return blocked


def generate_nodes(box: PDBox, domain: DomainSpec, crack: CrackPath) -> PDState:
    """
    Genera la red de nodos de la caja y sus enlaces

    La red es de centros de celda; las caras de celda coinciden con la línea
    de la entalla inicial y con el borde inferior de la viga, así que ningún
    nodo cae sobre la entalla. Los enlaces que cruzan la grieta actual o
    pasan por un agujero se eliminan.

    Raises:
        EmptyDomainError: si la caja no contiene material
    """
    rect = box.rect.intersection(domain.bounds)
    if rect is None:
        raise EmptyDomainError(box.rect.as_tuple())

    h = box.h_pd
    xs = _lattice_axis(rect.xmin, rect.xmax, domain.initial_crack.mouth[0], h)
    ys = _lattice_axis(rect.ymin, rect.ymax, domain.bounds.ymin, h)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    positions = np.column_stack([gx.ravel(), gy.ravel()])
    positions = positions[domain.contains(positions, tol=0.0)]

    if len(positions) == 0:
        raise EmptyDomainError(box.rect.as_tuple())

    bond_i, bond_j = build_neighbor_lists(positions, box.layer_width)

    # Filtrar sobre pares no dirigidos y reflejar
    half = bond_i < bond_j
    ui, uj = bond_i[half], bond_j[half]
    keep = ~_bonds_blocked(positions[ui], positions[uj], crack, domain)
    ui, uj = ui[keep], uj[keep]
    bond_i = np.concatenate([ui, uj])
    bond_j = np.concatenate([uj, ui])
    order = np.lexsort((bond_j, bond_i))
    bond_i, bond_j = bond_i[order], bond_j[order]

    n = len(positions)
    bond_dx = positions[bond_j] - positions[bond_i]
    bond_length = np.hypot(bond_dx[:, 0], bond_dx[:, 1])
    offsets = np.concatenate([[0], np.cumsum(np.bincount(bond_i, minlength=n))])

    state = PDState(
        positions=positions,
        volume=np.full(n, h * h),
        bond_i=bond_i,
        bond_j=bond_j,
        bond_dx=bond_dx,
        bond_length=bond_length,
        critical=np.zeros(len(bond_i)),
        offsets=offsets,
        boundary_layer=np.zeros(n, dtype=bool),
        box=box.with_rect(rect),
        crack=crack,
    )
    state.boundary_layer = identify_boundary_layer(state, state.box, domain)
    state.targets = np.zeros((int(state.boundary_layer.sum()), 2))

    aislados = int(np.sum(state.bond_counts == 0))
    if aislados:
        logger.warning(f"⚠️  {aislados} nodos sin enlaces en la caja PD")

    logger.debug(
        f"Caja PD {rect.as_tuple()}: {n} nodos, {len(bond_i) // 2} enlaces, "
        f"{int(state.boundary_layer.sum())} nodos en la capa de borde"
    )
    return state


def identify_boundary_layer(state: PDState, box: PDBox, domain: DomainSpec) -> np.ndarray:
    """
    Nodos a distancia < delta de un borde de la caja que no es borde de la viga

    Returns:
        Máscara booleana (n_nodes,)
    """
    rect = box.rect.intersection(domain.bounds) or box.rect
    x, y = state.positions[:, 0], state.positions[:, 1]
    distancias = (x - rect.xmin, y - rect.ymin, rect.xmax - x, rect.ymax - y)

    layer = np.zeros(state.n_nodes, dtype=bool)
    for dist, fisico in zip(distancias, domain.physical_edges(rect)):
        if not fisico:
            layer |= dist < box.layer_width
    return layer


def assign_critical_stretch(state: PDState, material: MaterialParams) -> None:
    """Precalcula S_c por enlace para el material dado"""
    state.critical = critical_stretch_array(state.bond_length, material.beta)


def peak_stretch_ratio(
    state: PDState,
    material: MaterialParams,
    displacement: np.ndarray,
    center: Optional[Tuple[float, float]] = None,
    radius: Optional[float] = None
) -> float:
    """
    Máximo de |S| / S_c de un campo de desplazamientos sobre la red

    Solo cuentan los enlaces que pueden ablandarse; con center y radius,
    además, los de punto medio a menos de radius del centro. La elongación
    es lineal en el desplazamiento, así que escalar el campo escala la razón.

    Returns:
        Razón máxima (0 si no queda ningún enlace)
    """
    u = np.asarray(displacement, dtype=float).reshape(state.n_nodes, 2)
    S = bond_stretch_array(state.bond_dx, state.bond_length, u[state.bond_j] - u[state.bond_i])
    ratio = np.abs(S) / critical_stretch_array(state.bond_length, material.beta)

    keep = ~state.prescribed_bonds
    if center is not None and radius is not None:
        mid = 0.5 * (state.positions[state.bond_i] + state.positions[state.bond_j])
        keep &= np.hypot(mid[:, 0] - center[0], mid[:, 1] - center[1]) < radius
    return float(ratio[keep].max()) if keep.any() else 0.0


# ═══════════════════════════════════════════════════════════
# INTEGRACIÓN EXPLÍCITA
# ═══════════════════════════════════════════════════════════

def apply_dirichlet_ramp(state: PDState, targets: np.ndarray, t: float, T: float) -> None:
    """
    Impone en la capa de borde u = (t/T) * objetivo, v = objetivo/T, a = 0

    Raises:
        InvalidScheduleError: si T <= 0 o t fuera de [0, T]
    """
    if not T > 0:
        raise InvalidScheduleError(T)
    if not 0.0 <= t <= T:
        raise InvalidScheduleError(t)

    idx = state.layer_indices
    targets = np.asarray(targets, dtype=float).reshape(len(idx), 2)
    state.displacement[idx] = (t / T) * targets
    state.velocity[idx] = targets / T
    state.acceleration[idx] = 0.0


def _node_blocks(n: int, n_blocks: int) -> List[Tuple[int, int]]:
    bounds = np.linspace(0, n, max(1, min(n_blocks, n)) + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def compute_internal_force(
    state: PDState,
    material: MaterialParams,
    horizon: HorizonGeometry,
    executor: Optional[Executor] = None,
    n_blocks: int = 1
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Fuerza interna por nodo sum_j f_ij V_j y elongación de cada enlace

    Cada bloque contiguo de nodos reúne sus propios enlaces en el orden de la
    lista, así el resultado no depende del número de hilos.
    """
    u = state.displacement

    def bloque(lo: int, hi: int):
        a, b = state.offsets[lo], state.offsets[hi]
        i = state.bond_i[a:b]
        j = state.bond_j[a:b]
        dx = state.bond_dx[a:b]
        L = state.bond_length[a:b]
        S = bond_stretch_array(dx, L, u[j] - u[i])
        f = pair_force_array(dx, L, S, material, horizon) * state.volume[j][:, None]
        fx = np.bincount(i - lo, weights=f[:, 0], minlength=hi - lo)
        fy = np.bincount(i - lo, weights=f[:, 1], minlength=hi - lo)
        return lo, hi, fx, fy, S

    blocks = _node_blocks(state.n_nodes, n_blocks)
    if executor is not None and len(blocks) > 1:
        results = list(executor.map(lambda lh: bloque(*lh), blocks))
    else:
        results = [bloque(lo, hi) for lo, hi in blocks]

    force = np.zeros((state.n_nodes, 2))
    stretch = np.empty(state.n_bonds)
    for lo, hi, fx, fy, S in results:
        force[lo:hi, 0] = fx
        force[lo:hi, 1] = fy
        stretch[state.offsets[lo]:state.offsets[hi]] = S
    return force, stretch


def _check_finite(state: PDState, step: Optional[int]) -> None:
    finite = (
        np.isfinite(state.displacement).all(axis=1)
        & np.isfinite(state.velocity).all(axis=1)
        & np.isfinite(state.acceleration).all(axis=1)
    )
    if not finite.all():
        raise DivergenceError(node=int(np.argmin(finite)), step=step)


def step_central_difference(
    state: PDState,
    material: MaterialParams,
    horizon: HorizonGeometry,
    dt: float,
    damping: float = 0.0,
    executor: Optional[Executor] = None,
    n_blocks: int = 1,
    step_index: Optional[int] = None
) -> None:
    """
    Un paso de Verlet en velocidades (diferencias centrales)

    Los nodos de la capa de borde tienen aceleración nula y avanzan con su
    velocidad de rampa. Las banderas de ablandamiento se actualizan tras el
    cambio de posición y nunca se reinician; los enlaces entre nodos de la
    capa siguen el campo global impuesto y no se ablandan.

    Raises:
        DivergenceError: si aparece un valor no finito
    """
    if not dt > 0:
        raise InvalidScheduleError(dt)
    if state.critical.shape != state.bond_length.shape or not state.critical.any():
        assign_critical_stretch(state, material)

    _check_finite(state, step_index)

    layer = state.boundary_layer
    v_half = state.velocity + 0.5 * dt * state.acceleration
    state.displacement += dt * v_half

    force, stretch = compute_internal_force(state, material, horizon, executor, n_blocks)
    acceleration = (force + state.body_force) / material.rho
    if damping > 0.0:
        acceleration -= damping * v_half
    acceleration[layer] = 0.0

    state.acceleration = acceleration
    state.velocity = v_half + 0.5 * dt * acceleration
    state.softened |= (np.abs(stretch) > state.critical) & ~state.prescribed_bonds
    state.time += dt
    state.steps_taken += 1

    _check_finite(state, step_index)


def run_local(
    state: PDState,
    material: MaterialParams,
    horizon: HorizonGeometry,
    steps: int,
    dt: float,
    damping: float = 0.0,
    executor: Optional[Executor] = None,
    n_blocks: int = 1,
    snapshot_every: int = 0,
    snapshot_dir: Optional[Path] = None
) -> Tuple[PDState, np.ndarray]:
    """
    Resolución local completa: rampa de Dirichlet + pasos explícitos

    Con state.ramp_field asignado, los nodos libres arrancan con la
    velocidad de rampa del campo global: si ese campo es de equilibrio, la
    caja entera lo sigue sin ondas desde la capa.

    Args:
        state: Estado con state.targets ya asignado
        steps: Número de pasos (T = steps * dt)
        dt: Paso de tiempo [s]

    Returns:
        (estado final, daño por nodo)
    """
    if steps == 0:
        return state, state.damage

    T = steps * dt
    assign_critical_stretch(state, material)

    if state.ramp_field is not None:
        libres = ~state.boundary_layer
        campo = np.asarray(state.ramp_field, dtype=float).reshape(state.n_nodes, 2)
        state.velocity[libres] = campo[libres] / T

    dt_estable = stable_time_step(material, horizon, state.box.h_pd)
    if dt > dt_estable:
        logger.warning(f"⚠️  dt = {dt:.3g} s supera el paso estable estimado {dt_estable:.3g} s")

    logger.info(
        f"🚀 Resolución PD: {state.n_nodes} nodos, {steps} pasos, T = {T:.4g} s"
    )
    reporte = max(1, steps // 10)

    for k in range(steps):
        apply_dirichlet_ramp(state, state.targets, k * dt, T)
        step_central_difference(
            state, material, horizon, dt,
            damping=damping, executor=executor, n_blocks=n_blocks, step_index=k
        )

        if snapshot_every and snapshot_dir is not None and (k + 1) % snapshot_every == 0:
            write_pd_snapshot(state, Path(snapshot_dir) / f"pd_{(k + 1) // snapshot_every:05d}.csv")

        if (k + 1) % reporte == 0:
            logger.debug(f"   paso {k + 1}/{steps}: daño máximo {state.damage.max():.3f}")

    apply_dirichlet_ramp(state, state.targets, T, T)

    damage = state.damage
    logger.info(f"✅ Resolución PD terminada: daño máximo {damage.max():.3f}")
    return state, damage
