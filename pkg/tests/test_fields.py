import json

import numpy as np
import pytest

from hkform.errors import FieldDataError
from hkform.fields import FieldData, load_fields, save_fields


def test_reality_enforced():
    with pytest.raises(FieldDataError):
        FieldData(1, 1.0, {(2,): 0.1})
    with pytest.raises(FieldDataError):
        FieldData(1, 1.0, {}, {(0, (1,)): 0.1j, (0, (-1,)): 0.1j})
    FieldData(1, 1.0, {(2,): 0.1 + 0.2j, (-2,): 0.1 - 0.2j})


def test_validation():
    with pytest.raises(FieldDataError):
        FieldData(4, 1.0)
    with pytest.raises(FieldDataError):
        FieldData(1, -1.0)
    with pytest.raises(FieldDataError):
        FieldData(2, 1.0, {}, {(2, (0, 1)): 0.1, (2, (0, -1)): 0.1})
    with pytest.raises(FieldDataError):
        FieldData(2, 1.0, {(1,): 0.1, (-1,): 0.1})
    with pytest.raises(FieldDataError):
        FieldData(1, 1.0, bundle_dim=0)


def test_sampling_is_real_cosine():
    f = FieldData.single_mode_u(1, 2.0, (3,), 0.25)
    pts = np.linspace(0, 2, 7)[:, None]
    assert np.allclose(f.u_at(pts), 0.5 * np.cos(3 * np.pi * pts[:, 0]))
    g = FieldData.single_mode_theta(2, 1.0, 1, (1, 0), 0.1)
    pts2 = np.array([[0.25, 0.0], [0.5, 0.3]])
    assert np.allclose(g.theta_at(1, pts2), 0.2 * np.cos(2 * np.pi * pts2[:, 0]))
    assert np.allclose(g.theta_at(0, pts2), 0.0)


def test_json_round_trip(tmp_path):
    f = FieldData(2, 1.5, {(0, 1): 0.1 + 0.05j, (0, -1): 0.1 - 0.05j, (0, 0): 0.3},
                  {(0, (1, 1)): 0.02, (0, (-1, -1)): 0.02}, bundle_dim=3)
    path = tmp_path / "f.json"
    save_fields(f, path)
    assert load_fields(path) == f
    assert json.loads(path.read_text())["bundle_dim"] == 3


def test_bad_files(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(FieldDataError):
        load_fields(bad)
    bad.write_text(json.dumps({"d": 1}))
    with pytest.raises(FieldDataError):
        load_fields(bad)
    with pytest.raises(FieldDataError):
        load_fields(tmp_path / "missing.json")


def test_scaled_and_theta_modes():
    f = FieldData.single_mode_theta(2, 1.0, 0, (0, 1), 0.1).scaled(-2.0)
    modes = f.theta_modes()
    assert np.allclose(modes[(0, 1)], [-0.2, 0.0])
    assert f.volume == 1.0
