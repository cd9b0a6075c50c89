import csv
import io
import json
import math

import pytest

from ym2.cli_runner import (
    Scenario,
    load_scenario,
    main,
    parse_scenario,
    run_compare,
    run_compute,
    run_mc,
)
from ym2.errors import ScenarioError

RECT = {
    "group": "su2",
    "rep": "fund",
    "pieces": [
        {"vertices": [[0.0, 1.0], [1.0, 1.0]]},
        {"vertices": [[1.0, 2.0], [0.0, 2.0]]},
    ],
    "gauges": ["pax", "ax", "exact"],
    "max_order": 2,
    "lattice_schedule": [8, 16, 32],
}


def scenario_dict(**overrides):
    data = json.loads(json.dumps(RECT))
    data.update(overrides)
    return data


def test_scenario_round_trip():
    s = parse_scenario(scenario_dict(mc={"lambda": [0.2], "samples": 10, "seed": 3}))
    again = parse_scenario(json.dumps(s.to_dict()))
    assert s == again


def test_unknown_top_key_rejected():
    with pytest.raises(ScenarioError, match="unknown"):
        parse_scenario(scenario_dict(extra=1))


def test_unknown_mc_key_rejected():
    with pytest.raises(ScenarioError, match="mc"):
        parse_scenario(
            scenario_dict(mc={"lambda": 0.1, "samples": 5, "seed": 1, "burn": 2})
        )


def test_unknown_gauge_named():
    with pytest.raises(ScenarioError, match=r"gauges\[0\]"):
        parse_scenario(scenario_dict(gauges=["holomorphic"]))


def test_missing_field_named():
    data = scenario_dict()
    del data["pieces"]
    with pytest.raises(ScenarioError, match="pieces"):
        parse_scenario(data)


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_compute_rectangle(tmp_path):
    s = parse_scenario(scenario_dict())
    out = tmp_path / "out.csv"
    text = run_compute(s, out)
    assert out.read_text() == text
    rows = _rows(text)
    # extrapolated order-1 entries agree with the worked value for all gauges
    for gauge in ("pax", "ax", "exact"):
        row = next(r for r in rows if r["gauge"] == gauge and r["order"] == "1" and r["N"] == "inf")
        err = float(row["error_estimate"])
        assert abs(float(row["coefficient"]) - (-1.5)) <= err + 1e-9
    # per-N raw rows are present for lattice gauges
    assert any(r["gauge"] == "pax" and r["N"] == "16" for r in rows)
    # rows are sorted by (gauge, order, N)
    keys = [
        (r["gauge"], int(r["order"]), math.inf if r["N"] == "inf" else int(r["N"]))
        for r in rows
    ]
    assert keys == sorted(keys)


def test_compute_empty_gauges(tmp_path):
    s = parse_scenario(scenario_dict(gauges=[]))
    text = run_compute(s, tmp_path / "o.csv")
    assert text.splitlines() == ["gauge,order,N,coefficient,error_estimate,flags"]


def test_csv_round_trip_bit_exact(tmp_path):
    s = parse_scenario(scenario_dict(gauges=["pax"]))
    text = run_compute(s, tmp_path / "o.csv")
    from ym2.diagram_engine import wilson_series

    res = wilson_series(s.loop(), s.representation(), "pax", 2, [8, 16, 32])
    rows = _rows(text)
    for k in range(3):
        row = next(r for r in rows if r["order"] == str(k) and r["N"] == "inf")
        assert float(row["coefficient"]) == res.coefficients[k]  # exact round-trip


def test_exact_rejected_for_self_intersecting():
    two_lap = scenario_dict(
        pieces=[
            {"vertices": [[0.0, 1.0], [1.0, 1.0]]},
            {"vertices": [[1.0, 2.0], [0.0, 2.0]]},
            {"vertices": [[0.0, 1.0], [1.0, 1.0]]},
            {"vertices": [[1.0, 2.0], [0.0, 2.0]]},
        ],
        gauges=["exact"],
    )
    s = parse_scenario(two_lap)
    with pytest.raises(ScenarioError, match="simple"):
        run_compute(s, None)


def test_crosses_axis_flag(tmp_path):
    dipped = scenario_dict(
        pieces=[
            {"vertices": [[0.0, -1.0], [1.0, -1.0]]},
            {"vertices": [[1.0, 2.0], [0.0, 2.0]]},
        ],
        gauges=["ax"],
        max_order=1,
        lattice_schedule=[4, 8, 16],
    )
    s = parse_scenario(dipped)
    rows = _rows(run_compute(s, None))
    assert all("crosses_axis" in r["flags"] for r in rows)


def test_compare_pass_and_fail():
    s = parse_scenario(scenario_dict(max_order=2))
    report, ok = run_compare(s)
    assert ok and "PASS" in report
    with pytest.raises(ScenarioError):
        run_compare(parse_scenario(scenario_dict(gauges=["pax"])))


def test_run_mc(tmp_path):
    s = parse_scenario(
        scenario_dict(
            gauges=["ax"],
            max_order=2,
            lattice_schedule=[4, 8, 16],
            mc={"lambda": [0.2], "samples": 2000, "seed": 5},
        )
    )
    text = run_mc(s, tmp_path / "mc.csv")
    rows = _rows(text)
    assert len(rows) == 1
    row = rows[0]
    assert abs(float(row["z"])) < 4.0
    assert row["n_samples"] == "2000"
    assert row["N"] == "16"


def test_run_mc_validation():
    base = scenario_dict(gauges=["ax"], lattice_schedule=[4, 8, 16])
    s = parse_scenario({**base, "mc": {"lambda": [0.2], "samples": 0, "seed": 1}})
    with pytest.raises(ScenarioError, match="no samples"):
        run_mc(s, None)
    s = parse_scenario({**base, "mc": {"lambda": [-0.5], "samples": 10, "seed": 1}})
    with pytest.raises(ScenarioError, match="lambda > 0"):
        run_mc(s, None)
    s = parse_scenario(base)
    with pytest.raises(ScenarioError, match="mc"):
        run_mc(s, None)


# -- CLI entry ----------------------------------------------------------------


def _write_scenario(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_main_compute(tmp_path):
    path = _write_scenario(tmp_path, scenario_dict(gauges=["pax"], max_order=1))
    out = tmp_path / "out.csv"
    assert main(["compute", "--scenario", path, "--out", str(out)]) == 0
    assert out.exists()


def test_main_compare_exit_codes(tmp_path):
    path = _write_scenario(tmp_path, scenario_dict(max_order=1))
    assert main(["compare", "--scenario", path]) == 0


def test_main_input_error(tmp_path):
    path = _write_scenario(tmp_path, scenario_dict(extra=2))
    assert main(["compute", "--scenario", path, "--out", str(tmp_path / "o.csv")]) == 2
    assert main(["compute", "--scenario", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "o.csv")]) == 2


def test_main_budget_exit_code(tmp_path):
    path = _write_scenario(tmp_path, scenario_dict(gauges=["pax"], max_order=1))
    code = main(
        ["--budget", "10", "compute", "--scenario", path, "--out", str(tmp_path / "o.csv")]
    )
    assert code == 3


def test_main_threads_env(tmp_path, monkeypatch):
    path = _write_scenario(tmp_path, scenario_dict(gauges=["pax"], max_order=1))
    monkeypatch.setenv("YM2_THREADS", "2")
    out = tmp_path / "o.csv"
    assert main(["compute", "--scenario", path, "--out", str(out)]) == 0
    monkeypatch.setenv("YM2_THREADS", "zebra")
    assert main(["compute", "--scenario", path, "--out", str(out)]) == 2
