# app/test/test_utils.py

"""
Tests de utilidades: unidades, métricas y geometría de segmentos
"""

import numpy as np
import pytest


class TestUnidades:
    """Tests de conversión de pulgadas"""

    def test_pulgadas_a_metros(self):
        """Test 1 in = 0.0254 m"""
        from app.utils.units import inches, to_inches

        assert inches(1.0) == 0.0254
        assert inches(20.0) == pytest.approx(0.508, rel=1e-15)
        assert to_inches(0.0254) == pytest.approx(1.0, rel=1e-15)

    def test_arreglos(self):
        """Test acepta arreglos"""
        from app.utils.units import inches

        np.testing.assert_allclose(inches(np.array([1.0, 8.0])), [0.0254, 0.2032], rtol=1e-15)


class TestFrechet:
    """Tests de la distancia de Fréchet discreta"""

    def test_identicas(self):
        """Test d(P, P) = 0"""
        from app.utils.metrics import discrete_frechet

        p = np.array([[0.0, 0.0], [1.0, 0.5], [2.0, 0.0]])
        assert discrete_frechet(p, p) == 0.0

    def test_paralelas(self):
        """Test dos segmentos paralelos a distancia 1"""
        from app.utils.metrics import discrete_frechet

        assert discrete_frechet([[0.0, 0.0], [1.0, 0.0]], [[0.0, 1.0], [1.0, 1.0]]) == 1.0

    def test_vertice_intermedio(self):
        """Test el vértice intermedio debe emparejarse con un extremo"""
        from app.utils.metrics import discrete_frechet

        p = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]
        q = [[0.0, 0.0], [2.0, 0.0]]
        assert discrete_frechet(p, q) == 1.0

    def test_un_punto(self):
        """Test secuencias de un vértice"""
        from app.utils.metrics import discrete_frechet

        assert discrete_frechet([[0.0, 0.0]], [[3.0, 4.0]]) == 5.0

    def test_vacia(self):
        """Test secuencia vacía"""
        from app.utils.metrics import discrete_frechet

        with pytest.raises(ValueError):
            discrete_frechet(np.zeros((0, 2)), [[0.0, 0.0]])

    def test_simetria_y_desigualdad_triangular(self, rng):
        """Test d(P, Q) = d(Q, P) y d(P, R) <= d(P, Q) + d(Q, R)"""
        from app.utils.metrics import discrete_frechet

        for _ in range(30):
            p, q, r = (rng.normal(size=(int(rng.integers(1, 8)), 2)) for _ in range(3))
            assert discrete_frechet(p, q) == discrete_frechet(q, p)
            assert discrete_frechet(p, r) <= discrete_frechet(p, q) + discrete_frechet(q, r) + 1e-12

    def test_trayectorias(self):
        """Test frechet_distance sobre CrackPath"""
        from app.schemas.geometry import CrackPath
        from app.utils.metrics import frechet_distance

        a = CrackPath(points=((0.0, 0.0), (0.0, 1.0)))
        b = CrackPath(points=((0.5, 0.0), (0.5, 1.0)))
        assert frechet_distance(a, b) == 0.5


class TestSegmentos:
    """Tests de intersecciones y distancias"""

    def test_cruce(self):
        """Test cruce, contacto en extremo y paralelos"""
        from app.utils.geometry import segments_intersect

        p1 = np.array([[-1.0, 0.0], [0.0, 0.0], [-1.0, 1.0], [2.0, -1.0]])
        p2 = np.array([[1.0, 0.0], [0.0, -1.0], [1.0, 1.0], [2.0, 1.0]])
        hit = segments_intersect(p1, p2, (0.0, -1.0), (0.0, 0.5))
        assert hit.tolist() == [True, True, False, False]

    def test_colineales_solapados(self):
        """Test solape colineal cuenta como intersección"""
        from app.utils.geometry import segments_intersect

        hit = segments_intersect(np.array([[0.0, 0.0]]), np.array([[2.0, 0.0]]), (1.0, 0.0), (3.0, 0.0))
        assert hit.tolist() == [True]

    def test_polilinea(self):
        """Test un segmento que cruza el segundo tramo"""
        from app.utils.geometry import segments_cross_polyline

        poly = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        hit = segments_cross_polyline(np.array([[0.5, 0.5], [0.5, 0.5]]),
                                      np.array([[0.5, 1.5], [0.9, 0.9]]), poly)
        assert hit.tolist() == [True, False]

    def test_circulo(self):
        """Test segmentos que pasan por el interior de un círculo"""
        from app.utils.geometry import segments_hit_circle

        p1 = np.array([[-2.0, 0.0], [-2.0, 1.0], [-2.0, 1.5]])
        p2 = np.array([[2.0, 0.0], [2.0, 1.0], [2.0, 1.5]])
        assert segments_hit_circle(p1, p2, (0.0, 0.0), 1.0).tolist() == [True, False, False]

    def test_distancia_a_segmento(self):
        """Test proyección interior y extremo"""
        from app.utils.geometry import point_segment_distance

        d, t = point_segment_distance(np.array([[0.5, 1.0], [3.0, 0.0]]), (0.0, 0.0), (1.0, 0.0))
        np.testing.assert_allclose(d, [1.0, 2.0])
        np.testing.assert_allclose(t, [0.5, 1.0])

    def test_distancia_a_polilinea(self):
        """Test tramo más cercano"""
        from app.utils.geometry import polyline_distance

        poly = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        d, idx = polyline_distance(np.array([[-0.5, 0.5], [0.5, 1.25]]), poly)
        np.testing.assert_allclose(d, [0.5, 0.25])
        assert idx.tolist() == [0, 1]

    def test_lado(self):
        """Test +1 a la izquierda del sentido boca -> punta y 0 sobre la línea"""
        from app.utils.geometry import signed_side

        poly = np.array([[0.0, 0.0], [0.0, 1.0]])
        sign, dist = signed_side(np.array([[-0.1, 0.5], [0.1, 0.5], [0.0, 0.5]]), poly)
        assert sign.tolist() == [1.0, -1.0, 0.0]
        np.testing.assert_allclose(dist, [0.1, 0.1, 0.0])

    def test_lado_en_vertice_interior(self):
        """Test seudo-normal en el codo de la polilínea"""
        from app.utils.geometry import signed_side

        poly = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 2.0]])
        sign, _ = signed_side(np.array([[-0.5, 1.5], [0.5, 0.9]]), poly)
        assert sign.tolist() == [1.0, -1.0]

    def test_longitud(self):
        """Test 3-4-5"""
        from app.utils.geometry import polyline_length

        assert polyline_length([[0.0, 0.0], [3.0, 4.0], [3.0, 5.0]]) == 6.0
