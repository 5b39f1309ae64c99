from datetime import timedelta

import numpy as np
import pytest
from scipy.stats import wilcoxon

from carriersig.errors import InvalidParameterError, MalformedInputError
from carriersig.simgen import DEFAULT_CENSUS, FleetSpec, generate, load_spec, ou_process, parse_config
from carriersig.stats import AntennaCensus
from fleet_tools import fleet_records, split

SMALL = AntennaCensus({1: 4, 2: 2, 3: 2})


def test_determinism():
    spec = FleetSpec(census=SMALL, duration=timedelta(days=3), seed=7)
    a, b = generate(spec), generate(spec)
    assert a.carrier_ids == b.carrier_ids
    for cid in a.carrier_ids:
        assert a.eirp[cid].tobytes() == b.eirp[cid].tobytes()
    assert a.antenna_of == b.antenna_of


def test_seed_changes_output():
    a = generate(FleetSpec(census=SMALL, duration=timedelta(days=2), seed=1))
    b = generate(FleetSpec(census=SMALL, duration=timedelta(days=2), seed=2))
    assert not np.array_equal(a.eirp["C00"], b.eirp["C00"])


def test_layout_follows_census():
    fleet = generate(FleetSpec(duration=timedelta(days=2)))
    assert len(fleet.carrier_ids) == 53
    assert AntennaCensus.from_antenna_map(fleet.antenna_of).counts == DEFAULT_CENSUS.counts
    assert fleet.eirp["C00"].size == 960


def test_zero_duration():
    with pytest.raises(InvalidParameterError):
        FleetSpec(duration=timedelta(0))


def test_negative_amplitude():
    with pytest.raises(InvalidParameterError):
        FleetSpec(carrier_db=-0.1)


def test_ou_statistics():
    rng = np.random.default_rng(0)
    x = ou_process(rng, 200_000, 180.0, 4 * 3600.0, 0.3)
    assert x.std() == pytest.approx(0.3, rel=0.05)
    lag = 80  # samples = one correlation time
    r = np.corrcoef(x[:-lag], x[lag:])[0, 1]
    assert r == pytest.approx(np.exp(-1), abs=0.05)


def test_identical_carriers_have_zero_distance():
    spec = FleetSpec(census=AntennaCensus({2: 1, 1: 2}), duration=timedelta(days=5), carrier_db=0.0)
    recs = fleet_records(spec)
    same, diff = split(recs)
    assert same.size == 1 and same[0] < 1e-6
    assert diff.min() > 0.1


def _separation(antenna_db, seeds=range(20)):
    out = []
    for seed in seeds:
        same, diff = split(fleet_records(FleetSpec(antenna_db=antenna_db, seed=seed)))
        out.append((same.mean(), diff.mean()))
    return np.array(out)


@pytest.mark.slow
def test_no_antenna_term_no_separation():
    sep = _separation(0.0)
    stat, p = wilcoxon(sep[:, 0] - sep[:, 1])
    assert p > 0.01


@pytest.mark.slow
def test_antenna_amplitude_monotone():
    means = [_separation(a)[:, 0].mean() for a in (0.15, 0.3, 0.6)]
    assert means[0] >= means[1] >= means[2]


def test_same_antenna_closer_in_expectation():
    sep = _separation(0.3, seeds=range(3))
    assert np.all(sep[:, 0] < sep[:, 1])


def test_config_file(tmp_path):
    path = tmp_path / "fleet.cfg"
    path.write_text("# fleet\ndays = 2\nseed = 9\ncensus = 1:3, 2:1\nantenna-db = 0.5\n")
    spec = load_spec(path, seed=11)
    assert spec.duration == timedelta(days=2)
    assert spec.seed == 11
    assert spec.census.counts == {1: 3, 2: 1}
    assert spec.antenna_db == 0.5


def test_config_rejects_unknown_key():
    with pytest.raises(MalformedInputError):
        parse_config("colour = blue\n")


def test_measurement_rows():
    fleet = generate(FleetSpec(census=AntennaCensus({1: 1}), duration=timedelta(hours=1)))
    rows = list(fleet.measurements())
    assert len(rows) == 20
    assert rows[1].timestamp - rows[0].timestamp == timedelta(minutes=3)
    assert rows[5].eirp == fleet.eirp["C0"][5]
