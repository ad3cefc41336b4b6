import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from wlsubdiv.errors import FormatError
from wlsubdiv.io import (load_values, read_mesh, read_obj, read_off, save_json, save_values,
                         write_mesh)
from wlsubdiv.mesh import random_mesh


@pytest.mark.parametrize("ext", [".off", ".obj"])
def test_mesh_roundtrip_2d(tmp_path, ext):
    tri = random_mesh(30, np.random.default_rng(0))
    p = tmp_path / f"m{ext}"
    write_mesh(p, tri.vertices, tri.faces)
    v, f = read_mesh(p)
    assert v.shape == (30, 2)
    np.testing.assert_array_equal(v, tri.vertices)
    np.testing.assert_array_equal(f, tri.faces)


def test_mesh_roundtrip_3d(tmp_path):
    v = np.random.default_rng(1).normal(size=(4, 3))
    f = np.array([[0, 1, 2], [0, 2, 3]])
    write_mesh(tmp_path / "s.obj", v, f)
    v2, f2 = read_mesh(tmp_path / "s.obj")
    np.testing.assert_array_equal(v2, v)
    with pytest.raises(FormatError, match="planar"):
        read_mesh(tmp_path / "s.obj", dim=2)


def test_obj_quad_names_face(tmp_path):
    p = tmp_path / "q.obj"
    p.write_text("# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3\nf 1 2 3 4\n")
    with pytest.raises(FormatError) as exc:
        read_obj(p)
    msg = str(exc.value)
    assert "face 1" in msg and "4 vertices" in msg and ":7:" in msg
    assert exc.value.line == 7 and exc.value.code == "parse_error"


def test_obj_slashes_and_negative_indices(tmp_path):
    p = tmp_path / "n.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 -1//1\n")
    v, f = read_obj(p)
    np.testing.assert_array_equal(f, [[0, 1, 2]])


def test_off_errors(tmp_path):
    p = tmp_path / "bad.off"
    p.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 0\n")
    with pytest.raises(FormatError, match="face 0 has 4 vertices"):
        read_off(p)
    p.write_text("OFF\n3 1 0\n0 0 0\n1 x 0\n0 1 0\n3 0 1 2\n")
    with pytest.raises(FormatError) as exc:
        read_off(p)
    assert exc.value.line == 4
    p.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n")
    with pytest.raises(FormatError, match="missing vertex"):
        read_off(p)
    p.write_text("PLY\n")
    with pytest.raises(FormatError, match="header"):
        read_off(p)
    with pytest.raises(FormatError, match="extension"):
        read_mesh(tmp_path / "x.stl")


@given(arrays(float, st.integers(1, 40),
              elements=st.floats(allow_nan=False, allow_infinity=False, width=64)))
def test_values_roundtrip_bit_equal(tmp_path_factory, z):
    p = tmp_path_factory.mktemp("v") / "values.csv"
    save_values(p, z)
    back = load_values(p)
    assert back.tobytes() == z.astype(float).tobytes()


def test_values_multi_column(tmp_path):
    z = np.random.default_rng(2).normal(size=(5, 3))
    save_values(tmp_path / "z.csv", z)
    assert (tmp_path / "z.csv").read_text().splitlines()[0] == "vertex_index,value_0,value_1,value_2"
    np.testing.assert_array_equal(load_values(tmp_path / "z.csv"), z)


def test_values_errors(tmp_path):
    p = tmp_path / "v.csv"
    p.write_text("vertex_index,value\n0,1.0\n2,3.0\n")
    with pytest.raises(FormatError, match="cover"):
        load_values(p)
    p.write_text("vertex_index,value\n0,abc\n")
    with pytest.raises(FormatError) as exc:
        load_values(p)
    assert exc.value.line == 2
    p.write_text("vertex_index,value\n0,1\n1,2\n")
    with pytest.raises(FormatError):
        load_values(p, n_vertices=3)


def test_values_use_dot_decimal(tmp_path):
    save_values(tmp_path / "v.csv", [0.1, 1e-300])
    assert (tmp_path / "v.csv").read_text() == \
        "vertex_index,value\n0,0.10000000000000001\n1,1e-300\n"


def test_json_handles_numpy(tmp_path):
    save_json(tmp_path / "p.json", {"a": np.arange(3), "b": np.float64(0.5), "c": np.int64(2)})
    import json
    assert json.loads((tmp_path / "p.json").read_text()) == {"a": [0, 1, 2], "b": 0.5, "c": 2}
