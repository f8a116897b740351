import json

import numpy as np
import pytest

from subtiling.catalog import CATALOG_INFO, CatalogEntry, builtin, load, names
from subtiling.errors import UnknownNameError
from subtiling.spectral import spectral_data
from subtiling.systems import SubstitutionSystem, validate_system


def test_names_listing():
    assert names() == ["bicolor3x3", "chair", "fibonacci", "nonpisot13", "table2d"]


def test_load_unknown_name():
    with pytest.raises(UnknownNameError) as exc:
        load("penrose")
    assert "available" in str(exc.value)


def test_load_builds_fresh_systems():
    a = load("chair")
    b = load("chair")
    assert a is not b
    assert a.to_json() == b.to_json()


def test_every_entry_validates(any_system):
    # validate_system raises on any defect; a report back means clean
    report = validate_system(any_system)
    assert report.primitive
    assert max(abs(r) for r in report.volume_residuals) < 1e-9


def test_stored_info_matches_recomputed_spectral(any_system):
    info = CATALOG_INFO[any_system.name]
    spec = spectral_data(any_system)
    assert any_system.d == info["dimension"]
    assert any_system.lam == pytest.approx(info["expansion"], rel=1e-12)
    stored = info["spectral"]
    got_abs = tuple(
        abs(c.theta) for c in spec.cells for _ in range(c.size)
    )
    assert np.allclose(got_abs, stored["theta_abs"], atol=1e-6)
    assert spec.ell == stored["ell"]
    assert spec.s == stored["s"]
    assert spec.regime == stored["regime"]
    if stored["alpha"] is None:
        assert spec.alpha is None
    else:
        assert spec.alpha == pytest.approx(stored["alpha"], abs=1e-6)


def test_builtin_entry_fields(any_system):
    entry = builtin(any_system.name)
    assert isinstance(entry, CatalogEntry)
    assert entry.name == any_system.name
    assert entry.system.to_json() == any_system.to_json()
    assert entry.regime == CATALOG_INFO[any_system.name]["spectral"]["regime"]
    assert entry.aperiodicity in ("proven", "unverified")
    assert entry.description
    d = entry.as_dict()
    assert d["name"] == any_system.name
    assert d["prototiles"] == [pt.name for pt in any_system.prototiles]
    assert d["spectral"]["regime"] == entry.regime
    json.dumps(d)  # plain data, serializable as-is


def test_aperiodicity_flags():
    flags = {name: builtin(name).aperiodicity for name in names()}
    assert flags["bicolor3x3"] == "unverified"
    assert all(v == "proven" for k, v in flags.items() if k != "bicolor3x3")


def test_json_round_trip_validates(any_system):
    text = any_system.to_json()
    back = SubstitutionSystem.from_json(text)
    assert back.to_json() == text
    assert back.name == any_system.name
    assert back.lam == any_system.lam
    for got, want in zip(back.digits, any_system.digits):
        assert sorted(got) == sorted(want)
    validate_system(back)