import numpy as np
import pytest

from oracles import SQRT3, brute_edge_lengths, hand_cross
from transbend.curves import CurveSpec, sample_curve
from transbend.errors import DegenerateSurfaceError, TransbendError
from transbend.fixtures import fixture_surface
from transbend.surface import (QuadMesh, assemble_surface, export_obj, fundamental_forms, load_obj,
                               mesh_edges, planarity_residual, to_quad_mesh, write_forms_csv)
from transbend.verify import conjugacy_residual


def polyline(verts, n=2):
    return sample_curve(CurveSpec("polyline", {"vertices": verts}, (0, len(verts) - 1)), n)


def test_plane_forms():
    f = fundamental_forms(fixture_surface("plane"))
    assert np.all(f.E == 1) and np.all(f.G == 1) and np.all(f.F == 0)
    assert np.all(f.e == 0) and np.all(f.g == 0) and np.all(f.f == 0)


def test_helicoid_forms_at_reference_sample():
    s = fixture_surface("helicoid")
    f = fundamental_forms(s)
    i, j = 5, 0  # u = 0, v = pi/2
    assert s.path.side_params[i] == pytest.approx(0.0, abs=1e-15)
    assert s.profile.side_params[j] == pytest.approx(np.pi / 2)
    assert f.F[i, j] == pytest.approx(1.0, abs=1e-15)
    area = np.sqrt(f.E[i, j] * f.G[i, j] - f.F[i, j] ** 2)
    assert area == pytest.approx(SQRT3, abs=1e-14)
    assert np.allclose(f.normal[i, j], hand_cross([0, 1, 1], [-1, 0, 1]) / SQRT3, atol=1e-15)


@pytest.mark.parametrize("name", ["helicoid", "parabolic", "circular-cone", "elliptic-cone", "miura"])
def test_lagrange_identity_and_f(name):
    s = fixture_surface(name)
    f = fundamental_forms(s)
    cross = np.cross(s.xu, s.xv)
    det = f.E * f.G - f.F**2
    assert np.allclose(det, np.sum(cross * cross, -1), rtol=1e-10, atol=0)
    assert np.abs(f.f).max() <= 1e-10
    assert np.all(f.E > 0) and np.all(f.G > 0) and np.all(det > 0)


def test_degenerate_surface_rejected():
    with pytest.raises(DegenerateSurfaceError, match="degenerate-surface") as info:
        fixture_surface("degenerate-helicoid")
    assert info.value.u == pytest.approx(0.5)


def test_single_quad():
    s = assemble_surface(polyline([[0, 0, 0], [1, 0, 0]]), polyline([[0, 0, 0], [0, 1, 0]]))
    m = to_quad_mesh(s)
    assert m.faces.tolist() == [[0, 2, 3, 1]]
    assert len(m.crease_edges) == 0


def test_two_by_two_parallelograms_are_planar():
    a = polyline([[0, 0, 0], [1, 0, 1], [2, 0, 0]])
    b = polyline([[0, 0, 0], [0, 1, 0.5], [0.3, 2, 0]])
    m = to_quad_mesh(assemble_surface(a, b))
    assert len(m.faces) == 4
    assert planarity_residual(m).max() <= 1e-12
    # crease flags on the two interior grid lines, two edges each
    assert len(m.crease_edges) == 4


def test_miura_mesh_counts():
    m = to_quad_mesh(fixture_surface("miura"))
    assert m.vertices.shape == (81, 3)
    assert len(m.faces) == 64
    assert len({tuple(sorted(f)) for f in m.faces.tolist()}) == 64
    # every interior grid line is a slope change: 7 lines each way, 8 edges each
    assert len(m.crease_edges) == 2 * 7 * 8


def test_mesh_edges_match_brute_force():
    m = to_quad_mesh(fixture_surface("eggbox"))
    edges = mesh_edges(m)
    brute = brute_edge_lengths(m.vertices, m.faces)
    assert sorted(map(tuple, edges.tolist())) == sorted(brute)


def test_planarity_of_smooth_meshes():
    for name in ("helicoid", "circular-cone", "parabolic"):
        assert planarity_residual(to_quad_mesh(fixture_surface(name))).max() <= 1e-12


def test_conjugacy_residual_is_rounding_only():
    assert conjugacy_residual(fixture_surface("helicoid", 21)) <= 1e-10


def test_obj_roundtrip(tmp_path):
    m = to_quad_mesh(fixture_surface("helicoid"))
    export_obj(m, tmp_path / "a.obj")
    back = load_obj(tmp_path / "a.obj")
    assert np.abs(back.vertices - m.vertices).max() <= 1e-6
    assert np.array_equal(back.faces, m.faces)
    text = (tmp_path / "a.obj").read_text().splitlines()
    assert sum(line.startswith("v ") for line in text) == len(m.vertices)
    assert text[len(m.vertices)].startswith("f ")


def test_one_quad_obj(tmp_path):
    s = assemble_surface(polyline([[0, 0, 0], [1, 0, 0]]), polyline([[0, 0, 0], [0, 1, 0]]))
    export_obj(to_quad_mesh(s), tmp_path / "q.obj")
    lines = (tmp_path / "q.obj").read_text().splitlines()
    assert [l.split()[0] for l in lines] == ["v"] * 4 + ["f"]
    assert lines[-1] == "f 1 3 4 2"


def test_empty_mesh_refused(tmp_path):
    empty = QuadMesh(np.zeros((0, 3)), np.zeros((0, 4), int), np.zeros((0, 2), int))
    with pytest.raises(TransbendError):
        export_obj(empty, tmp_path / "e.obj")
    assert not (tmp_path / "e.obj").exists()


def test_forms_csv(tmp_path):
    s = fixture_surface("plane")
    write_forms_csv(s, fundamental_forms(s), tmp_path / "f.csv")
    rows = (tmp_path / "f.csv").read_text().splitlines()
    assert rows[0] == "u,v,x,y,z,E,F,G,e,f,g"
    assert len(rows) == 1 + 25
    assert rows[1].split(",")[5] == "1.0000000000000000e+00"
