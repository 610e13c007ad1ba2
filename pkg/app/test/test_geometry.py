# app/test/test_geometry.py

"""
Tests de la geometría de la viga y de los schemas geométricos
"""

import numpy as np
import pytest
from pydantic import ValidationError

from app.schemas.geometry import CrackPath, DomainSpec, Hole, Rect


class TestCasos:
    """Tests de los casos de referencia"""

    @pytest.mark.parametrize("case_id, x_crack, tip_y, n_holes", [
        ("I", -0.1524, -0.0762, 0),
        ("II", -0.1524, -0.0762, 3),
        ("III", -0.127, -0.0635, 3),
    ])
    def test_dimensiones(self, case_id, x_crack, tip_y, n_holes):
        """Test viga de 20 x 8 in con entalla vertical desde el borde inferior"""
        from app.services.geometry import build_case

        domain = build_case(case_id)
        assert domain.length == pytest.approx(0.508)
        assert domain.height == pytest.approx(0.2032)
        assert domain.support_inset == pytest.approx(0.0254)
        assert len(domain.holes) == n_holes

        mouth, tip = domain.initial_crack.points
        assert mouth == pytest.approx((x_crack, -0.1016))
        assert tip == pytest.approx((x_crack, tip_y))

    def test_agujeros(self):
        """Test agujeros de 0.5 in a 4 in a la izquierda del centro"""
        from app.services.geometry import build_case

        domain = build_case("II")
        centros = np.array([h.center for h in domain.holes])
        np.testing.assert_allclose(centros[:, 0], -0.1016)
        np.testing.assert_allclose(centros[:, 1], [0.0698500, 0.0190500, -0.0317500], atol=1e-12)
        assert all(h.radius == pytest.approx(0.00635) for h in domain.holes)

    def test_apoyos_y_carga(self):
        """Test apoyos a 1 in de los extremos y carga en el centro superior"""
        from app.services.geometry import build_case

        domain = build_case("I")
        izq, der = domain.supports
        assert izq == pytest.approx((-0.2286, -0.1016))
        assert der == pytest.approx((0.2286, -0.1016))
        assert domain.load_point == pytest.approx((0.0, 0.1016))

    def test_identificador_normalizado(self):
        """Test se aceptan minúsculas y espacios"""
        from app.services.geometry import build_case

        assert len(build_case(" ii ").holes) == 3

    def test_caso_desconocido(self):
        """Test caso IV"""
        from app.exceptions import UnknownCaseError
        from app.services.geometry import build_case

        with pytest.raises(UnknownCaseError) as exc_info:
            build_case("IV")
        assert exc_info.value.exit_code == 1

    def test_espesor(self):
        """Test espesor configurable"""
        from app.services.geometry import build_case

        assert build_case("I", thickness=0.01).thickness == 0.01


class TestReferencias:
    """Tests de las trayectorias de referencia empaquetadas"""

    @pytest.mark.parametrize("case_id", ["I", "II", "III"])
    def test_boca_en_la_punta_inicial(self, case_id):
        """Test la trayectoria de referencia parte de la punta de la entalla"""
        from app.services.geometry import build_case, load_reference_path

        ref = load_reference_path(case_id)
        tip = build_case(case_id).initial_crack.tip
        assert ref.mouth == pytest.approx(tip, abs=1e-9)
        assert len(ref.points) > 2

    def test_sube_hacia_la_carga(self):
        """Test la punta de referencia queda por encima de la boca"""
        from app.services.geometry import load_reference_path

        ref = load_reference_path("I")
        assert ref.tip[1] > ref.mouth[1]

    def test_archivo_faltante(self, tmp_path):
        """Test directorio de datos sin el CSV"""
        from app.exceptions import ReferenceDataError
        from app.services.geometry import load_reference_path

        with pytest.raises(ReferenceDataError) as exc_info:
            load_reference_path("I", data_dir=tmp_path)
        assert exc_info.value.details["path"].endswith("case_I.csv")

    def test_caso_desconocido(self, tmp_path):
        """Test referencia de un caso inexistente"""
        from app.exceptions import UnknownCaseError
        from app.services.geometry import load_reference_path

        with pytest.raises(UnknownCaseError):
            load_reference_path("V", data_dir=tmp_path)


class TestSchemas:
    """Tests de validación de los schemas geométricos"""

    def test_rect_degenerado(self):
        """Test xmax <= xmin"""
        with pytest.raises(ValidationError):
            Rect(xmin=0.0, ymin=0.0, xmax=0.0, ymax=1.0)

    def test_rect_operaciones(self):
        """Test intersección, unión, traslación y contención"""
        a = Rect(xmin=0.0, ymin=0.0, xmax=2.0, ymax=2.0)
        b = Rect(xmin=1.0, ymin=1.0, xmax=3.0, ymax=3.0)
        assert a.intersection(b).as_tuple() == (1.0, 1.0, 2.0, 2.0)
        assert a.union(b).as_tuple() == (0.0, 0.0, 3.0, 3.0)
        assert a.translated(1.0, -1.0).as_tuple() == (1.0, -1.0, 3.0, 1.0)
        assert a.intersection(Rect(xmin=5.0, ymin=5.0, xmax=6.0, ymax=6.0)) is None
        assert a.contains([[0.0, 0.0], [2.0, 2.1]]).tolist() == [True, False]
        assert Rect.centered((1.0, 1.0), 2.0, 4.0).as_tuple() == (0.0, -1.0, 2.0, 3.0)

    @pytest.mark.parametrize("points", [
        ((0.0, 0.0),),
        ((0.0, 0.0), (0.0, 0.0), (1.0, 1.0)),
        ((0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)),
    ])
    def test_trayectoria_invalida(self, points):
        """Test un solo vértice, vértices repetidos o auto-intersección"""
        with pytest.raises(ValidationError):
            CrackPath(points=points)

    def test_trayectoria(self):
        """Test boca, punta, longitud y dirección"""
        path = CrackPath.from_array([[0.0, 0.0], [0.0, 3.0], [4.0, 3.0]])
        assert path.mouth == (0.0, 0.0)
        assert path.tip == (4.0, 3.0)
        assert path.arc_length == 7.0
        np.testing.assert_allclose(path.tip_direction(), [1.0, 0.0])

    def test_agujero_fuera_de_la_viga(self, small_beam):
        """Test agujero que sale de la viga"""
        with pytest.raises(ValidationError):
            DomainSpec(
                **small_beam.model_dump(exclude={"holes"}),
                holes=[Hole(center=(0.098, 0.0), radius=0.005)],
            )

    def test_entalla_lejos_del_borde(self, small_beam):
        """Test la entalla debe nacer en el borde inferior"""
        with pytest.raises(ValidationError):
            DomainSpec(
                **small_beam.model_dump(exclude={"initial_crack"}),
                initial_crack=CrackPath(points=((0.0, -0.03), (0.0, -0.02))),
            )

    def test_apoyos_fuera(self, small_beam):
        """Test apoyos más allá de la mitad de la viga"""
        with pytest.raises(ValidationError):
            DomainSpec(**{**small_beam.model_dump(), "support_inset": 0.1})

    def test_contiene_excluye_agujeros(self, holed_beam):
        """Test los puntos dentro de un agujero no son material"""
        mask = holed_beam.contains([[0.04, 0.0], [0.04, 0.006], [0.0, 0.0], [0.2, 0.0]])
        assert mask.tolist() == [False, True, True, False]

    def test_bordes_fisicos(self, small_beam):
        """Test qué lados de una caja coinciden con la viga"""
        caja = Rect(xmin=-0.1, ymin=-0.04, xmax=0.0, ymax=0.0)
        assert small_beam.physical_edges(caja) == (True, True, False, False)

    def test_agujero_corta_rect(self):
        """Test agujero que corta, contiene o no toca un rectángulo"""
        hole = Hole(center=(0.0, 0.0), radius=1.0)
        assert hole.cuts_rect(Rect(xmin=0.5, ymin=-0.1, xmax=1.5, ymax=0.1))
        assert not hole.cuts_rect(Rect(xmin=-0.1, ymin=-0.1, xmax=0.1, ymax=0.1))
        assert hole.contains_rect(Rect(xmin=-0.1, ymin=-0.1, xmax=0.1, ymax=0.1))
        assert not hole.cuts_rect(Rect(xmin=2.0, ymin=2.0, xmax=3.0, ymax=3.0))

    def test_caja_pd_menor_que_una_celda(self):
        """Test caja PD más chica que h_pd"""
        from app.schemas.geometry import PDBox

        with pytest.raises(ValidationError):
            PDBox(rect=Rect(xmin=0.0, ymin=0.0, xmax=0.001, ymax=1.0), h_pd=0.01, layer_width=0.04)
