# app/test/test_global_solver.py

"""
Tests del solver global PUM
"""

import numpy as np
import pytest


def _random_points(domain, rng, n=200, margin=1e-3):
    b = domain.bounds
    pts = np.column_stack([
        rng.uniform(b.xmin + margin, b.xmax - margin, 4 * n),
        rng.uniform(b.ymin + margin, b.ymax - margin, 4 * n),
    ])
    return pts[domain.contains(pts, tol=0.0)][:n]


def _beam_system(domain, material, h_pum=0.02, penalty_factor=1e6, crack="initial"):
    from app.services.global_solver import (
        assemble_system,
        beam_boundary_conditions,
        build_cover,
        enrich_cracked_patches,
    )

    cover = build_cover(domain, h_pum, 1.3)
    spaces = enrich_cracked_patches(cover, domain.initial_crack if crack == "initial" else crack)
    bcs = beam_boundary_conditions(domain, 1000.0, h_pum, penalty_factor=penalty_factor)
    return assemble_system(cover, spaces, material, bcs)


# ═══════════════════════════════════════════════════════════
# CUBIERTA
# ═══════════════════════════════════════════════════════════

class TestCubierta:
    """Tests de la cubierta y la partición de la unidad"""

    def test_particion_de_la_unidad(self, small_beam, rng):
        """Test sum phi = 1 en puntos aleatorios"""
        from app.services.global_solver import build_cover

        for alpha in (1.1, 1.3, 1.9):
            cover = build_cover(small_beam, 0.02, alpha)
            np.testing.assert_allclose(cover.partition_sum(_random_points(small_beam, rng)), 1.0, atol=1e-14)

    def test_particion_con_agujero(self, holed_beam, rng):
        """Test sum phi = 1 en el material alrededor de un agujero"""
        from app.services.global_solver import build_cover

        cover = build_cover(holed_beam, 0.0025, 1.3)
        assert not cover.active.all()
        np.testing.assert_allclose(cover.partition_sum(_random_points(holed_beam, rng)), 1.0, atol=1e-14)

    def test_gradientes_suman_cero(self, small_beam, rng):
        """Test sum grad phi = 0"""
        from app.services.global_solver import build_cover

        cover = build_cover(small_beam, 0.02, 1.3)
        pts = _random_points(small_beam, rng)
        _, dphi, covered = cover.weights(pts, cover.candidates(pts))
        assert covered.all()
        np.testing.assert_allclose(dphi.sum(axis=1), 0.0, atol=1e-9)

    def test_tamano_de_la_grilla(self, small_beam):
        """Test 0.2 x 0.08 con h = 0.02 -> 10 x 4 parches"""
        from app.services.global_solver import build_cover

        cover = build_cover(small_beam, 0.02, 1.3)
        assert (cover.nx, cover.ny) == (10, 4)
        assert cover.n_patches == 40

    @pytest.mark.parametrize("h, alpha", [(0.0, 1.3), (-0.01, 1.3), (0.02, 1.0), (0.02, 2.0)])
    def test_parametros_invalidos(self, small_beam, h, alpha):
        """Test h <= 0 o alpha fuera de (1, 2)"""
        from app.exceptions import InvalidParameterError
        from app.services.global_solver import build_cover

        with pytest.raises(InvalidParameterError):
            build_cover(small_beam, h, alpha)


class TestEnriquecimiento:
    """Tests de la función escalón truncada"""

    def test_parches_cortados(self, small_beam):
        """Test solo se enriquecen parches que toca la entalla"""
        from app.services.global_solver import build_cover, enrich_cracked_patches

        cover = build_cover(small_beam, 0.02, 1.3)
        spaces = enrich_cracked_patches(cover, small_beam.initial_crack)
        assert spaces.enriched.any()
        for p in np.flatnonzero(spaces.enriched):
            r = cover.patch_rect(int(p))
            assert r.xmin < -0.02 < r.xmax
            assert r.ymin < -0.03

        sin_grieta = enrich_cracked_patches(cover, None)
        assert not sin_grieta.enriched.any()
        assert sin_grieta.n_scalar == 4 * cover.n_patches

    def test_nula_delante_de_la_punta(self, small_beam, rng):
        """Test eta = 0 en todo punto delante de la punta"""
        from app.services.global_solver import build_cover, enrich_cracked_patches

        spaces = enrich_cracked_patches(build_cover(small_beam, 0.02, 1.3), small_beam.initial_crack)
        pts = np.column_stack([rng.uniform(-0.1, 0.1, 100), rng.uniform(-0.0299, 0.04, 100)])
        eta, deta = spaces.enrichment(pts)
        assert np.all(eta == 0.0)
        assert np.all(deta == 0.0)

    def test_signo_opuesto_a_cada_lado(self, small_beam):
        """Test puntos espejados detrás de la punta: eta = +-1/4"""
        from app.services.global_solver import build_cover, enrich_cracked_patches

        spaces = enrich_cracked_patches(build_cover(small_beam, 0.02, 1.3), small_beam.initial_crack)
        eta, _ = spaces.enrichment(np.array([[-0.021, -0.035], [-0.019, -0.035]]))
        assert abs(eta[0]) == pytest.approx(0.25, rel=1e-12)
        assert eta[1] == pytest.approx(-eta[0], rel=1e-12)

    def test_pista_de_lado_sobre_la_grieta(self, small_beam):
        """Test sobre la grieta el signo sale de la pista"""
        from app.services.global_solver import build_cover, enrich_cracked_patches

        spaces = enrich_cracked_patches(build_cover(small_beam, 0.02, 1.3), small_beam.initial_crack)
        punto = np.array([[-0.02, -0.035]])
        arriba, _ = spaces.enrichment(punto, side_hint=np.array([1.0]))
        abajo, _ = spaces.enrichment(punto, side_hint=np.array([-1.0]))
        assert arriba[0] == pytest.approx(0.25, rel=1e-12)
        assert abajo[0] == pytest.approx(-0.25, rel=1e-12)

    def test_grieta_que_gira_mas_de_90_grados(self, square_domain):
        """Test el truncamiento usa la tangente del tramo más cercano, no la de la punta"""
        from app.schemas.geometry import CrackPath
        from app.services.global_solver import build_cover, enrich_cracked_patches

        crack = CrackPath(points=((0.0, -0.5), (0.0, 0.0), (0.3, 0.0), (0.3, -0.2)))
        spaces = enrich_cracked_patches(build_cover(square_domain, 0.1, 1.3), crack)
        pts = np.array([
            [-0.05, -0.3], [0.05, -0.3],   # junto al primer tramo, "delante" de la punta
            [0.3, -0.3],                   # delante de la punta
            [0.32, -0.15],                 # en la rampa del último tramo
        ])
        eta, deta = spaces.enrichment(pts)

        assert abs(eta[0]) == 1.0 and eta[1] == -eta[0]
        assert np.all(deta[:2] == 0.0)
        assert eta[2] == 0.0
        assert abs(eta[3]) == pytest.approx(0.5, rel=1e-12)
        np.testing.assert_allclose(np.abs(deta[3]), [0.0, 10.0], atol=1e-12)


# ═══════════════════════════════════════════════════════════
# CUADRATURA
# ═══════════════════════════════════════════════════════════

class TestCuadratura:
    """Tests de las celdas de integración"""

    def test_area_del_cuadrado(self, square_domain):
        """Test sum w = área"""
        from app.services.global_solver import build_cover, build_quadrature

        quad = build_quadrature(build_cover(square_domain, 0.25, 1.3), square_domain.initial_crack)
        assert quad.weights.sum() == pytest.approx(1.0, rel=1e-12)

    def test_area_con_agujero(self, holed_beam):
        """Test el área descuenta el agujero"""
        from app.services.global_solver import build_cover, build_quadrature

        quad = build_quadrature(build_cover(holed_beam, 0.02, 1.3), holed_beam.initial_crack)
        esperado = 0.2 * 0.08 - np.pi * 0.005 ** 2
        assert quad.weights.sum() == pytest.approx(esperado, rel=2e-3)
        assert holed_beam.contains(quad.points, tol=0.0).all()

    def test_puntos_ordenados_por_celda(self, small_beam):
        """Test los puntos de una celda son contiguos"""
        from app.services.global_solver import build_cover, build_quadrature

        quad = build_quadrature(build_cover(small_beam, 0.02, 1.3), small_beam.initial_crack)
        assert np.all(np.diff(quad.cell) >= 0)
        assert len(quad.cell_ids) == quad.n_cells


# ═══════════════════════════════════════════════════════════
# ENSAMBLAJE Y SOLUCIÓN
# ═══════════════════════════════════════════════════════════

class TestPatchTest:
    """Reproducción exacta de un campo lineal"""

    def test_campo_lineal(self, square_domain, unit_material, rng):
        """Test u = (x, 0) impuesto en el contorno se reproduce en el interior"""
        from app.services.global_solver import (
            BoundaryConditions,
            assemble_and_solve,
            build_cover,
            enrich_cracked_patches,
            evaluate_displacement,
        )

        cover = build_cover(square_domain, 0.25, 1.3)
        spaces = enrich_cracked_patches(cover, None)
        bcs = BoundaryConditions(
            dirichlet=lambda p: np.column_stack([p[:, 0], np.zeros(len(p))])
        )
        solution = assemble_and_solve(cover, spaces, unit_material, bcs, 1.0)

        pts = _random_points(square_domain, rng, n=100, margin=0.05)
        u = evaluate_displacement(solution, pts)
        np.testing.assert_allclose(u[:, 0], pts[:, 0], atol=1e-8)
        np.testing.assert_allclose(u[:, 1], 0.0, atol=1e-8)


class TestRigidezDeVolumen:
    """Tests de la matriz de Galerkin antes de imponer apoyos"""

    @pytest.fixture
    def rigidez(self, square_domain, unit_material):
        from app.services.global_solver import (
            assemble_stiffness,
            build_cover,
            enrich_cracked_patches,
        )

        spaces = enrich_cracked_patches(build_cover(square_domain, 0.25, 1.3), square_domain.initial_crack)
        return spaces, assemble_stiffness(build_cover(square_domain, 0.25, 1.3), spaces, unit_material)

    def test_semidefinida_positiva(self, rigidez):
        """Test autovalores de K >= 0 (salvo redondeo)"""
        _, K = rigidez
        densa = K.toarray()
        np.testing.assert_allclose(densa, densa.T, rtol=0.0, atol=1e-12 * np.abs(densa).max())
        valores = np.linalg.eigvalsh(0.5 * (densa + densa.T))
        assert valores.min() >= -1e-10 * valores.max()

    def test_modos_rigidos_en_el_nucleo(self, rigidez):
        """Test K m = 0 para traslaciones y rotación"""
        from app.services.global_solver import rigid_body_modes

        spaces, K = rigidez
        for mode in rigid_body_modes(spaces):
            assert np.abs(K @ mode).max() <= 1e-9 * abs(K).max() * np.abs(mode).max()


class TestModosRigidos:
    """Tests de los coeficientes de movimiento rígido"""

    def test_traslacion_y_rotacion(self, small_beam, rng):
        """Test los modos reproducen (1, 0), (0, 1) y (-y, x)"""
        from app.services.global_solver import (
            GlobalSolution,
            build_cover,
            enrich_cracked_patches,
            evaluate_displacement,
            rigid_body_modes,
        )

        spaces = enrich_cracked_patches(build_cover(small_beam, 0.02, 1.3), small_beam.initial_crack)
        modes = rigid_body_modes(spaces)
        pts = _random_points(small_beam, rng)

        esperados = (
            np.column_stack([np.ones(len(pts)), np.zeros(len(pts))]),
            np.column_stack([np.zeros(len(pts)), np.ones(len(pts))]),
            np.column_stack([-pts[:, 1], pts[:, 0]]),
        )
        for mode, esperado in zip(modes, esperados):
            u = evaluate_displacement(GlobalSolution(spaces=spaces, coefficients=mode, load_factor=1.0), pts)
            np.testing.assert_allclose(u, esperado, atol=1e-13)


class TestSistemaDeLaViga:
    """Tests del sistema de flexión en tres puntos"""

    def test_rigidez_simetrica(self, small_beam, benchmark_material):
        """Test K = K^T"""
        system = _beam_system(small_beam, benchmark_material)
        assert abs(system.stiffness - system.stiffness.T).max() == 0.0

    def test_carga_nula(self, small_beam, benchmark_material):
        """Test factor de carga 0 -> solución nula"""
        system = _beam_system(small_beam, benchmark_material)
        assert np.all(system.solve(0.0).coefficients == 0.0)

    def test_linealidad_en_la_carga(self, small_beam, benchmark_material):
        """Test u(lambda) = lambda u(1)"""
        system = _beam_system(small_beam, benchmark_material)
        full = system.solve(1.0).coefficients
        np.testing.assert_allclose(system.solve(0.25).coefficients, 0.25 * full, rtol=1e-12, atol=1e-30)

    @pytest.mark.parametrize("lf", [-0.1, 1.5])
    def test_factor_fuera_de_rango(self, small_beam, benchmark_material, lf):
        """Test factor de carga fuera de [0, 1]"""
        from app.exceptions import InvalidParameterError

        system = _beam_system(small_beam, benchmark_material)
        with pytest.raises(InvalidParameterError):
            system.solve(lf)

    def test_escala_de_carga(self, small_beam, benchmark_material):
        """Test solve(lf, escala) = lf * escala * u(1)"""
        system = _beam_system(small_beam, benchmark_material)
        full = system.solve(1.0).coefficients
        escalada = system.solve(0.5, load_scale=4.0)
        np.testing.assert_allclose(escalada.coefficients, 2.0 * full, rtol=1e-12, atol=1e-30)
        assert escalada.load_factor == 0.5

    @pytest.mark.parametrize("escala", [0.0, -1.0])
    def test_escala_no_positiva(self, small_beam, benchmark_material, escala):
        """Test escala de carga <= 0"""
        from app.exceptions import InvalidParameterError

        system = _beam_system(small_beam, benchmark_material)
        with pytest.raises(InvalidParameterError):
            system.solve(1.0, load_scale=escala)

    def test_antisimetria_con_entalla_central(self, benchmark_material, rng):
        """Test entalla en el centro y apoyos fijos: ux impar y uy par en x"""
        from app.schemas.geometry import CrackPath, DomainSpec
        from app.services.global_solver import (
            assemble_system,
            beam_boundary_conditions,
            build_cover,
            enrich_cracked_patches,
            evaluate_displacement,
        )

        domain = DomainSpec(
            length=0.2, height=0.08, support_inset=0.01, thickness=0.01,
            initial_crack=CrackPath(points=((0.0, -0.04), (0.0, -0.03))),
        )
        cover = build_cover(domain, 0.02, 1.3)
        spaces = enrich_cracked_patches(cover, domain.initial_crack)
        bcs = beam_boundary_conditions(domain, 1000.0, 0.02, supports="pin-pin")
        solution = assemble_system(cover, spaces, benchmark_material, bcs).solve(1.0)

        pts = _random_points(domain, rng, n=200, margin=1e-3)
        pts = pts[np.abs(pts[:, 0]) > 5e-3]
        espejo = pts * np.array([-1.0, 1.0])
        u = evaluate_displacement(solution, pts)
        v = evaluate_displacement(solution, espejo)

        escala = np.abs(u).max()
        np.testing.assert_allclose(v[:, 0], -u[:, 0], atol=1e-6 * escala)
        np.testing.assert_allclose(v[:, 1], u[:, 1], atol=1e-6 * escala)

    def test_flecha_bajo_la_carga(self, small_beam, benchmark_material):
        """Test el punto de carga baja y la entalla se abre"""
        from app.services.global_solver import evaluate_displacement

        solution = _beam_system(small_beam, benchmark_material).solve(1.0)
        u = evaluate_displacement(solution, [(0.0, 0.035), (-0.0199, -0.039), (-0.0201, -0.039)])
        assert u[0, 1] < 0.0
        assert u[1, 0] - u[2, 0] > 0.0

    def test_apoyos_sin_penalizacion(self, small_beam, benchmark_material):
        """Test sin apoyos efectivos quedan 3 modos rígidos"""
        from app.exceptions import AssemblyError

        with pytest.raises(AssemblyError) as exc:
            _beam_system(small_beam, benchmark_material, penalty_factor=0.0)
        assert exc.value.details["nullity"] == 3


class TestEvaluacion:
    """Tests de la evaluación del desplazamiento"""

    @pytest.fixture
    def solution(self, small_beam, benchmark_material):
        return _beam_system(small_beam, benchmark_material).solve(1.0)

    def test_fuera_de_la_viga(self, solution):
        """Test punto fuera"""
        from app.exceptions import OutOfDomainError
        from app.services.global_solver import evaluate_displacement

        with pytest.raises(OutOfDomainError) as exc:
            evaluate_displacement(solution, [(0.0, 0.0), (0.5, 0.0)])
        assert exc.value.details["reason"] == "OUT_OF_DOMAIN"

    def test_sobre_la_grieta_sin_pista(self, solution):
        """Test punto sobre la grieta sin lado"""
        from app.exceptions import OutOfDomainError
        from app.services.global_solver import evaluate_displacement

        with pytest.raises(OutOfDomainError) as exc:
            evaluate_displacement(solution, [(-0.02, -0.035)])
        assert exc.value.details["reason"] == "ON_CRACK"

    def test_sobre_la_grieta_con_pista(self, solution):
        """Test cada lado de la grieta tiene su propio valor"""
        from app.services.global_solver import evaluate_displacement

        izq = evaluate_displacement(solution, [(-0.02, -0.035)], side_hint=[-1.0])
        der = evaluate_displacement(solution, [(-0.02, -0.035)], side_hint=[1.0])
        assert np.all(np.isfinite(izq)) and np.all(np.isfinite(der))
        assert not np.allclose(izq, der, rtol=0.0, atol=0.0)

    def test_muestreo(self, solution):
        """Test la malla de muestreo cubre la viga con el espaciado dado"""
        from app.services.global_solver import sample_displacement

        pts, u = sample_displacement(solution, 0.01)
        assert pts.shape == (20 * 8, 2)
        assert u.shape == pts.shape
        assert np.all(np.isfinite(u))
