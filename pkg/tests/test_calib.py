import numpy as np
import pytest

from afrelay.calib import (CalibratedMultipliers, read_multipliers_csv,
                           write_multipliers_csv)
from afrelay.errors import ShapeError, UsageError


def test_kind_shape_validation():
    CalibratedMultipliers("global", np.asarray(2.0), "LTTPC")
    CalibratedMultipliers("per_subcarrier", np.ones(3), "LTTPC")
    CalibratedMultipliers("per_node_per_subcarrier", np.ones((2, 3)), "LTIPC")
    with pytest.raises(ShapeError):
        CalibratedMultipliers("global", np.ones(2), "LTTPC")
    with pytest.raises(UsageError):
        CalibratedMultipliers("bogus", np.ones(2), "LTTPC")
    with pytest.raises(UsageError):
        CalibratedMultipliers("per_subcarrier", np.array([1.0, -1.0]), "LTTPC")


def test_require_matches_kind_and_constraint():
    m = CalibratedMultipliers("per_subcarrier", np.ones(2), "LTTPC")
    m.require("per_subcarrier", "LTTPC")
    with pytest.raises(UsageError):
        m.require("global", "LTTPC")
    with pytest.raises(UsageError):
        m.require("per_subcarrier", "LTIPC")


def test_csv_round_trip(tmp_path):
    mults = [
        CalibratedMultipliers("per_node_per_subcarrier",
                              np.array([[0.1, 0.2], [0.3, 0.4]]), "LTIPC",
                              training_seed=5, samples=100, role="beta"),
        CalibratedMultipliers("per_subcarrier", np.array([1.5, 2.5]), "LTTPC",
                              training_seed=5, samples=100, role="beta",
                              iteration=2),
        CalibratedMultipliers("global", np.asarray(0.07), "LTTPC",
                              training_seed=5, samples=100, role="mu"),
    ]
    path = tmp_path / "m.csv"
    write_multipliers_csv(str(path), mults)
    back = read_multipliers_csv(str(path))
    assert len(back) == 3
    by_key = {(m.role, m.kind, m.iteration): m for m in back}
    for m in mults:
        r = by_key[(m.role, m.kind, m.iteration)]
        assert np.allclose(r.values, m.values)
        assert (r.constraint, r.training_seed, r.samples) == \
            (m.constraint, m.training_seed, m.samples)


def test_csv_missing_columns_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("role,kind\nbeta,global\n")
    with pytest.raises(ShapeError):
        read_multipliers_csv(str(path))
