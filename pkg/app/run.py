"""
Línea de comandos del simulador

Subcomandos:
    run <config>              corrida acoplada completa
    compare <csv> <csv>       distancia de Fréchet entre dos trayectorias
    plot <config> <csv...>    gráfico de comparación
    pd-only <config>          una resolución PD alrededor de la entalla
    global-only <config>      una resolución elástica y muestreo del campo
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from app.core.config import settings, print_settings
from app.core.dependencies import get_executor, resolve_workers, validate_environment
from app.core.logging import setup_logging, setup_run_logging
from app.crud import (
    load_config,
    read_crack_csv,
    serialize_config,
    write_crack_csv,
    write_diagnostics_csv,
    write_field_snapshot,
    write_pd_snapshot,
)
from app.exceptions import EXIT_OK, ReferenceDataError, handle_exception
from app.schemas.config import RunConfig
from app.services.coupling import (
    build_service,
    build_solvers,
    calibrate_load_scale,
    domain_from_config,
    make_initial_box,
)
from app.services.geometry import CASES, load_reference_path
from app.services.global_solver import sample_displacement
from app.utils.metrics import frechet_distance
from app.utils.plotting import plot_comparison

logger = logging.getLogger(__name__)


def _output_dir(config: RunConfig, override: Optional[str]) -> Path:
    return validate_environment(override or config.output.output_dir)


def _calibrate(config: RunConfig, global_solver, local_solver, domain) -> None:
    """Escala de carga calibrada si la configuración la pide"""
    target = config.discretization.target_stretch_ratio
    if target is not None:
        calibrate_load_scale(global_solver, local_solver, domain, config.box_policy(), target)


# ═══════════════════════════════════════════════════════════
# SUBCOMANDOS
# ═══════════════════════════════════════════════════════════

def cmd_run(args: argparse.Namespace) -> int:
    """Corrida acoplada: trayectoria, diagnóstico, gráfico y reporte"""
    config = load_config(args.config)
    destino = _output_dir(config, args.output)
    run_logger = setup_run_logging(destino)
    workers = resolve_workers(args.workers or config.output.workers)
    executor = get_executor(workers)

    try:
        service = build_service(config, executor, n_blocks=workers, output_dir=destino)
        report = service.run()
    finally:
        if executor is not None:
            executor.shutdown()

    case_id = config.case.case_id
    reference = None
    if case_id in CASES:
        try:
            reference = load_reference_path(case_id)
            report.reference_distance = frechet_distance(report.final_crack, reference)
        except ReferenceDataError as e:
            logger.warning(f"⚠️  {e.message}")

    (destino / "config.ini").write_text(serialize_config(config), encoding="utf-8")
    write_crack_csv(report.final_crack, destino / "crack.csv")
    write_diagnostics_csv(report.diagnostics, destino / "diagnostics.csv")

    paths = [("simulación", report.final_crack)]
    if reference is not None:
        paths.append(("referencia", reference))
    plot_comparison(paths, service.domain, destino / "crack.svg",
                    boxes=[b.rect for b in report.boxes])

    texto = service.generate_report()
    (destino / "reporte.txt").write_text(texto, encoding="utf-8")
    for d in report.diagnostics:
        run_logger.info(
            f"paso {d.step}: carga {d.load_factor:.3f}, punta ({d.tip_x:.6f}, {d.tip_y:.6f}), "
            f"daño máximo {d.max_damage:.3f}, resoluciones {d.local_solves}"
        )
    print(texto)
    logger.info(f"✅ Resultados en {destino}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    """Imprime la distancia de Fréchet discreta entre dos CSV"""
    a = read_crack_csv(args.first)
    b = read_crack_csv(args.second)
    print(f"{frechet_distance(a, b):.9g}")
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    """Gráfico de las trayectorias sobre la viga de la configuración"""
    config = load_config(args.config)
    domain = domain_from_config(config)
    paths = [(Path(f).stem, read_crack_csv(f)) for f in args.paths]
    destino = Path(args.output) if args.output else _output_dir(config, None) / "comparacion.svg"
    plot_comparison(paths, domain, destino)
    return EXIT_OK


def cmd_pd_only(args: argparse.Namespace) -> int:
    """Una resolución PD en la caja inicial con la carga completa"""
    config = load_config(args.config)
    destino = _output_dir(config, args.output)
    executor = get_executor(args.workers or config.output.workers)
    try:
        domain, global_solver, local_solver = build_solvers(config, executor)
        crack = domain.initial_crack
        policy = config.box_policy()
        _calibrate(config, global_solver, local_solver, domain)
        box = make_initial_box(crack, policy, domain)
        solution = global_solver.solve(crack, 1.0)
        state = local_solver.build(box, crack)
        state.ramp_field = global_solver.node_field(solution, state)
        state = local_solver.run(state, global_solver.layer_targets(solution, state))
        nueva = local_solver.extract(state, crack)
    finally:
        if executor is not None:
            executor.shutdown()

    write_pd_snapshot(state, destino / "pd_field.csv")
    write_crack_csv(nueva, destino / "crack_pd_only.csv")
    logger.info(
        f"✅ Resolución PD: {state.n_nodes} nodos, daño máximo {state.damage.max():.3f}, "
        f"punta ({nueva.tip[0]:.6f}, {nueva.tip[1]:.6f})"
    )
    return EXIT_OK


def cmd_global_only(args: argparse.Namespace) -> int:
    """Una resolución elástica con la entalla inicial y muestreo del campo"""
    config = load_config(args.config)
    destino = _output_dir(config, args.output)
    executor = get_executor(args.workers or config.output.workers)
    try:
        domain, global_solver, local_solver = build_solvers(config, executor)
        _calibrate(config, global_solver, local_solver, domain)
        solution = global_solver.solve(domain.initial_crack, 1.0)
    finally:
        if executor is not None:
            executor.shutdown()

    spacing = args.spacing or config.discretization.h_pum
    puntos, u = sample_displacement(solution, spacing)
    write_field_snapshot(puntos, u, destino / "global_field.csv")
    logger.info(f"✅ Campo global muestreado en {len(puntos)} puntos")
    return EXIT_OK


# ═══════════════════════════════════════════════════════════
# PUNTO DE ENTRADA
# ═══════════════════════════════════════════════════════════

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m app", description=settings.DESCRIPTION)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="Corrida acoplada completa")
    p.add_argument("config", help="Archivo INI de la corrida")
    p.add_argument("-o", "--output", help="Directorio de resultados")
    p.add_argument("-w", "--workers", type=int, help="Hilos de cómputo")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="Distancia de Fréchet entre dos trayectorias")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("plot", help="Gráfico de comparación")
    p.add_argument("config")
    p.add_argument("paths", nargs="+", help="CSV de trayectorias")
    p.add_argument("-o", "--output", help="Archivo SVG de destino")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("pd-only", help="Una resolución PD (depuración)")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.add_argument("-w", "--workers", type=int)
    p.set_defaults(func=cmd_pd_only)

    p = sub.add_parser("global-only", help="Una resolución elástica y campo de desplazamiento")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.add_argument("-w", "--workers", type=int)
    p.add_argument("--spacing", type=float, help="Espaciado de muestreo [m]")
    p.set_defaults(func=cmd_global_only)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Ejecuta un subcomando

    Returns:
        Código de salida: 0 éxito, 1 error de configuración, 2 error del solver
    """
    args = build_parser().parse_args(argv)
    setup_logging()
    if settings.DEBUG:
        print_settings()
    try:
        return args.func(args)
    except Exception as exc:
        return handle_exception(exc)


if __name__ == "__main__":
    sys.exit(main())
