# app/test/test_crack_extraction.py

"""
Tests de la extracción de la grieta desde el daño
"""

import numpy as np
import pytest

from app.schemas.geometry import CrackPath


def _band_grid():
    """Banda vertical de daño en x = 0 desde y = -0.04 hasta y = -0.02"""
    from app.services.crack_extraction import DamageGrid

    s = 0.001
    xs = -0.01 + s * np.arange(21)
    ys = -0.04 + s * np.arange(31)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    values = np.clip(1.0 - np.abs(X) / 0.003, 0.0, 1.0)
    values[Y > -0.02 + 1e-9] = 0.0
    return DamageGrid(origin=(-0.01, -0.04), spacing=s, values=values)


def _l_grid():
    """Banda en L: sube por x = 0 hasta y = -0.025 y gira hacia x = 0.01"""
    from app.services.crack_extraction import DamageGrid
    from app.utils.geometry import polyline_distance

    s = 0.001
    xs = -0.01 + s * np.arange(31)
    ys = -0.04 + s * np.arange(31)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    dist, _ = polyline_distance(np.column_stack([X.ravel(), Y.ravel()]), L_PATH)
    values = np.clip(1.0 - dist.reshape(X.shape) / 0.003, 0.0, 1.0)
    return DamageGrid(origin=(-0.01, -0.04), spacing=s, values=values)


PREVIOUS = CrackPath(points=((0.0, -0.04), (0.0, -0.03)))
L_PATH = np.array([(0.0, -0.04), (0.0, -0.025), (0.01, -0.025)])


class TestDamageGrid:
    """Tests de la grilla de daño"""

    @pytest.mark.parametrize("spacing, values", [
        (0.0, np.zeros((3, 3))),
        (0.1, np.zeros((1, 3))),
        (0.1, np.full((3, 3), 1.5)),
        (0.1, np.full((3, 3), -0.1)),
    ])
    def test_grilla_invalida(self, spacing, values):
        """Test espaciado no positivo, grilla degenerada o valores fuera de [0, 1]"""
        from app.exceptions import InvalidParameterError
        from app.services.crack_extraction import DamageGrid

        with pytest.raises(InvalidParameterError):
            DamageGrid(origin=(0.0, 0.0), spacing=spacing, values=values)

    def test_coordenadas(self):
        """Test xs, ys y nodos"""
        from app.services.crack_extraction import DamageGrid

        grid = DamageGrid(origin=(1.0, 2.0), spacing=0.5, values=np.zeros((3, 2)))
        np.testing.assert_allclose(grid.xs, [1.0, 1.5, 2.0])
        np.testing.assert_allclose(grid.ys, [2.0, 2.5])
        assert grid.nodes().shape == (6, 2)


class TestResample:
    """Tests del remuestreo del daño nodal"""

    def _estado(self, small_beam):
        from app.schemas.geometry import PDBox, Rect
        from app.services.pd_solver import generate_nodes

        box = PDBox(rect=Rect(xmin=0.0, ymin=-0.02, xmax=0.04, ymax=0.02), h_pd=0.002, layer_width=0.008)
        return generate_nodes(box, small_beam, small_beam.initial_crack)

    def test_dano_uniforme(self, small_beam):
        """Test todos los enlaces rotos: grilla de unos"""
        from app.services.crack_extraction import resample_damage

        state = self._estado(small_beam)
        state.softened[:] = True
        grid = resample_damage(state, 0.004)
        assert grid.values.shape == (11, 11)
        np.testing.assert_allclose(grid.values, 1.0, rtol=1e-12)

    def test_sin_dano(self, small_beam):
        """Test estado sano: grilla nula"""
        from app.services.crack_extraction import resample_damage

        grid = resample_damage(self._estado(small_beam), 0.004)
        assert np.all(grid.values == 0.0)

    def test_espaciado_menor_que_la_red(self, small_beam):
        """Test espaciado < h_pd"""
        from app.exceptions import InvalidParameterError
        from app.services.crack_extraction import resample_damage

        with pytest.raises(InvalidParameterError):
            resample_damage(self._estado(small_beam), 0.001)


class TestIsoContour:
    """Tests de marching squares"""

    def test_umbral_fuera_de_rango(self):
        """Test umbral 0 o 1"""
        from app.exceptions import InvalidParameterError
        from app.services.crack_extraction import DamageGrid, iso_contour

        grid = DamageGrid(origin=(0.0, 0.0), spacing=1.0, values=np.zeros((3, 3)))
        for t in (0.0, 1.0):
            with pytest.raises(InvalidParameterError):
                iso_contour(grid, t)

    def test_sin_cruces(self):
        """Test grilla sin daño: lista vacía"""
        from app.services.crack_extraction import DamageGrid, iso_contour

        grid = DamageGrid(origin=(0.0, 0.0), spacing=1.0, values=np.zeros((4, 4)))
        assert iso_contour(grid, 0.35) == []

    def test_esquina(self):
        """Test una esquina dentro: un segmento entre los puntos medios de dos aristas"""
        from app.services.crack_extraction import DamageGrid, iso_contour

        grid = DamageGrid(origin=(0.0, 0.0), spacing=1.0, values=np.array([[1.0, 0.0], [0.0, 0.0]]))
        curvas = iso_contour(grid, 0.5)
        assert len(curvas) == 1
        puntos = {tuple(p) for p in curvas[0]}
        assert puntos == {(0.5, 0.0), (0.0, 0.5)}

    def test_banda_vertical(self):
        """Test una banda que cruza la grilla: dos bordes rectos"""
        from app.services.crack_extraction import DamageGrid, iso_contour

        values = np.zeros((11, 6))
        values[4:7, :] = 1.0
        grid = DamageGrid(origin=(0.0, 0.0), spacing=1.0, values=values)
        curvas = iso_contour(grid, 0.5)
        assert len(curvas) == 2
        xs = sorted(float(c[0, 0]) for c in curvas)
        assert xs == [3.5, 6.5]
        for c in curvas:
            assert np.all(c[:, 0] == c[0, 0])
            assert len(c) == 6

    def test_curva_cerrada(self):
        """Test un pico aislado: rombo cerrado"""
        from app.services.crack_extraction import DamageGrid, iso_contour

        values = np.zeros((5, 5))
        values[2, 2] = 1.0
        curvas = iso_contour(DamageGrid(origin=(0.0, 0.0), spacing=1.0, values=values), 0.5)
        assert len(curvas) == 1
        c = curvas[0]
        assert len(c) == 5
        np.testing.assert_array_equal(c[0], c[-1])
        np.testing.assert_allclose(np.abs(c[:-1] - 2.0).sum(axis=1), 0.5)

    def test_banda_sintetica(self):
        """Test el contorno de la banda queda a |x| = 0.00195"""
        from app.services.crack_extraction import iso_contour

        curvas = iso_contour(_band_grid(), 0.35)
        assert len(curvas) == 1
        c = curvas[0]
        lados = c[c[:, 1] < -0.021]
        np.testing.assert_allclose(np.abs(lados[:, 0]), 0.00195, rtol=1e-9)


class TestCenterline:
    """Tests del eje de la banda y la actualización de la grieta"""

    def test_extension_por_el_eje(self):
        """Test la grieta avanza por x = 0 hasta el final de la banda"""
        from app.services.crack_extraction import centerline, iso_contour

        grid = _band_grid()
        nueva = centerline(iso_contour(grid, 0.35), PREVIOUS, grid, 0.35, 0.004, 0.0005)

        assert nueva.mouth == PREVIOUS.mouth
        tip = np.asarray(nueva.tip)
        assert abs(tip[0]) < 0.0015
        assert -0.024 < tip[1] < -0.018
        assert nueva.arc_length > PREVIOUS.arc_length + 0.006
        assert np.all(np.abs(nueva.as_array()[:, 0]) < 0.002)

    def test_banda_en_L_sigue_la_esquina(self):
        """Test el eje de una banda que gira 90 grados dobla con ella"""
        from app.services.crack_extraction import centerline, iso_contour
        from app.utils.geometry import polyline_distance

        grid = _l_grid()
        nueva = centerline(iso_contour(grid, 0.35), PREVIOUS, grid, 0.35, 0.004, 0.0005)

        assert nueva.mouth == PREVIOUS.mouth
        tip = np.asarray(nueva.tip)
        assert tip[0] > 0.007
        assert abs(tip[1] + 0.025) < 0.0015
        dist, _ = polyline_distance(nueva.as_array(), L_PATH)
        assert dist.max() < 0.002
        # pasa cerca de la esquina
        assert np.hypot(*(nueva.as_array() - (0.0, -0.025)).T).min() < 0.002

    @pytest.mark.parametrize("grid_fn", [_band_grid, _l_grid])
    def test_umbral_entre_03_y_05(self, grid_fn):
        """Test la punta extraída casi no depende del umbral en [0.3, 0.5]"""
        from app.services.crack_extraction import centerline, iso_contour

        grid = grid_fn()
        puntas = []
        for umbral in (0.3, 0.35, 0.4, 0.45, 0.5):
            nueva = centerline(iso_contour(grid, umbral), PREVIOUS, grid, umbral, 0.004, 0.0005)
            assert nueva.arc_length > PREVIOUS.arc_length
            puntas.append(nueva.tip)

        puntas = np.asarray(puntas)
        dispersion = np.hypot(*(puntas - puntas.mean(axis=0)).T).max()
        assert dispersion < 2 * grid.spacing

    def test_sin_contornos(self):
        """Test sin banda: la trayectoria no cambia"""
        from app.services.crack_extraction import centerline

        grid = _band_grid()
        assert centerline([], PREVIOUS, grid, 0.35, 0.004, 0.0005) is PREVIOUS

    def test_banda_ambigua(self):
        """Test banda mucho más ancha que el horizonte"""
        from app.exceptions import AmbiguousBandError
        from app.services.crack_extraction import centerline, iso_contour

        grid = _band_grid()
        with pytest.raises(AmbiguousBandError):
            centerline(iso_contour(grid, 0.35), PREVIOUS, grid, 0.35, 0.0001, 0.0005)


class TestUpdateCrack:
    """Tests de la concatenación de extensiones"""

    def test_sin_extension(self):
        """Test None devuelve la misma trayectoria"""
        from app.services.crack_extraction import update_crack

        assert update_crack(PREVIOUS, None, 0.001) is PREVIOUS

    def test_extension_recta(self):
        """Test boca y punta preservadas, longitud no decrece"""
        from app.services.crack_extraction import update_crack

        ext = CrackPath(points=((0.0, -0.03), (0.0, -0.025), (0.0001, -0.02)))
        nueva = update_crack(PREVIOUS, ext, 0.001)
        assert nueva.mouth == PREVIOUS.mouth
        assert nueva.tip == (0.0001, -0.02)
        assert nueva.arc_length >= PREVIOUS.arc_length

    def test_vertices_previos_conservados(self):
        """Test solo se simplifica el tramo nuevo"""
        from app.services.crack_extraction import update_crack

        previa = CrackPath(points=((0.0, -0.04), (0.0, -0.03), (0.005, -0.025)))
        ext = CrackPath(points=((0.005, -0.025), (0.01, -0.02)))
        nueva = update_crack(previa, ext, 0.001)
        assert nueva.points[0] == (0.0, -0.04)
        assert nueva.tip == (0.01, -0.02)

    def test_salto_en_la_punta(self):
        """Test extensión a más de 2 h_pd de la punta"""
        from app.exceptions import CrackGapError
        from app.services.crack_extraction import update_crack

        ext = CrackPath(points=((0.01, -0.03), (0.01, -0.02)))
        with pytest.raises(CrackGapError):
            update_crack(PREVIOUS, ext, 0.001)

    def test_autointerseccion(self):
        """Test la extensión no puede cruzar la grieta previa"""
        from app.exceptions import CrackGeometryError
        from app.services.crack_extraction import update_crack

        previa = CrackPath(points=((0.0, -0.04), (0.0, -0.03), (0.005, -0.03)))
        ext = CrackPath(points=((0.005, -0.03), (0.005, -0.035), (-0.001, -0.035)))
        with pytest.raises(CrackGeometryError):
            update_crack(previa, ext, 0.001)
