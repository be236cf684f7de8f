import csv
import io
import json

import pytest

from renyires import cli, figures
from renyires.wiretap import RateRegion


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def pair(tmp_path):
    p = write(tmp_path, "p.json", {"alphabet": ["0", "1"], "probs": ["0.5", "0.5"]})
    q = write(tmp_path, "q.json", {"alphabet": ["0", "1"], "probs": [0.75, 0.25]})
    return p, q


def test_divergence_values(capsys, pair):
    p, q = pair
    code, out, _ = run(capsys, "divergence", "--model", p, "--target", q, "--s", "0", "1")
    assert code == 0
    vals = {float(r["s"]): float(r["divergence"]) for r in rows(out)}
    assert vals[1.0] == pytest.approx(0.287682, abs=1e-6)
    assert vals[0.0] == pytest.approx(0.143841, abs=1e-6)


def test_divergence_identical_is_zero(capsys, pair):
    p, _ = pair
    code, out, _ = run(capsys, "divergence", "--model", p, "--target", p, "--s", "-1", "-0.5", "0", "0.5", "1")
    assert code == 0
    assert all(abs(float(r["divergence"])) < 1e-12 for r in rows(out))


def test_divergence_support_violation(capsys, tmp_path, pair):
    p, _ = pair
    z = write(tmp_path, "z.json", {"alphabet": ["0", "1"], "probs": [1.0, 0.0]})
    code, _, err = run(capsys, "divergence", "--model", p, "--target", z, "--s", "1")
    assert code == cli.EXIT_VALIDATION
    assert "error" in err


def test_invalid_model_exit_code(capsys, tmp_path):
    bad = write(tmp_path, "bad.json", {"alphabet": ["0", "1"], "probs": [0.5, 0.6]})
    code, _, _ = run(capsys, "min-rate", "--target", bad)
    assert code == cli.EXIT_VALIDATION


def test_infeasible_exit_code(capsys, tmp_path):
    q = write(tmp_path, "q.json", {"alphabet": ["0", "1"], "probs": [0.05, 0.95]})
    code, _, err = run(capsys, "min-rate", "--target", q)
    assert code == cli.EXIT_INFEASIBLE
    assert "infeasible" in err


def test_min_rate_preset(capsys):
    code, out, _ = run(capsys, "min-rate", "--s", "1", "0")
    assert code == 0
    vals = {float(r["s"]): float(r["min_rate"]) for r in rows(out)}
    assert vals[1.0] == pytest.approx(0.307485, abs=1e-6)
    assert vals[0.0] == pytest.approx(0.192745, abs=1e-6)


def test_log_base_two(capsys):
    _, nats, _ = run(capsys, "min-rate", "--s", "1")
    _, bits, _ = run(capsys, "min-rate", "--s", "1", "--log-base", "2")
    n = float(rows(nats)[0]["min_rate"])
    b = float(rows(bits)[0]["min_rate"])
    assert b == pytest.approx(n / 0.6931471805599453)


def test_simulate_exact(capsys):
    code, out, _ = run(capsys, "simulate", "--method", "exact-enum", "--s", "1", "--n", "1", "--M", "2")
    assert code == 0
    rec = json.loads(out)[0]
    assert rec["value"] == pytest.approx(0.165514, abs=1e-6)
    assert rec["std_error"] == 0.0
    assert set(rec) == {"method", "n", "M", "s", "value", "std_error", "seed", "trials"}


def test_simulate_monte_carlo_deterministic(capsys):
    args = ("simulate", "--s", "0.5", "1", "--n", "2", "--M", "3", "--trials", "2000", "--seed", "5")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b


def test_simulate_size_cap(capsys):
    code, _, err = run(capsys, "simulate", "--method", "exact-enum", "--n", "10", "--M", "10")
    assert code == cli.EXIT_SIZE_CAP
    assert "monte-carlo" in err


def test_bad_rate_range(capsys):
    code, _, _ = run(capsys, "resolvability", "--rate-min", "0.5", "--rate-max", "0.1")
    assert code == cli.EXIT_OTHER
    code, _, _ = run(capsys, "resolvability", "--rate-step", "0")
    assert code == cli.EXIT_OTHER
    code, _, _ = run(capsys, "resolvability", "--grid-res", "1")
    assert code == cli.EXIT_OTHER


def test_resolvability_and_exponent(capsys):
    code, out, _ = run(capsys, "resolvability", "--s", "1", "-0.5", "--rate-max", "0.4", "--rate-step", "0.1", "--grid-res", "40")
    assert code == 0
    table = rows(out)
    assert len(table) == 10
    assert all(float(r["lower"]) <= float(r["upper"]) + 1e-12 for r in table)
    code, out, _ = run(capsys, "exponent", "--s", "1", "--rate-min", "0.5", "--rate-max", "0.5")
    assert float(rows(out)[0]["e_iid"]) == pytest.approx(0.192515, abs=1e-6)


def test_region_json_round_trip(capsys):
    code, out, _ = run(capsys, "region", "--s", "1", "--grid-res", "20")
    assert code == 0
    data = json.loads(out)["1"]
    det = RateRegion.from_dict(data["deterministic"])
    assert det.pieces[0].r0_min == pytest.approx(0.148420, abs=1e-6)
    sto = RateRegion.from_dict(data["stochastic"])
    assert sto.to_dict() == data["stochastic"]


def test_capacity(capsys):
    code, out, _ = run(capsys, "capacity", "--s", "0", "--grid-res", "50")
    assert code == 0
    vals = {r["s"]: float(r["capacity"]) for r in rows(out)}
    assert vals["mi"] == pytest.approx(0.285781, abs=2e-3)
    assert vals["0"] == pytest.approx(0.285781, abs=2e-3)


def test_figure_to_file(tmp_path, capsys):
    out = tmp_path / "fig3a.csv"
    code = cli.main(["figure", "fig3a", "--out", str(out)])
    assert code == 0
    data = figures.read_csv(out.read_text())
    at = {(x, c): y for x, c, y in data}
    assert at[(0.2, "s=1")] == pytest.approx(0.307485, abs=1e-6)


def test_figure_csv_round_trip(capsys):
    _, text, _ = run(capsys, "figure", "fig3a")
    parsed = figures.read_csv(text)
    again = figures.FigureData("fig3a", parsed, x_is_rate=False).to_csv()
    assert again == text
