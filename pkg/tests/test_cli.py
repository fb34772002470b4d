import json
from fractions import Fraction

import pytest

from bitoss.binomials import GridDist, bivbin
from bitoss.channels import Channel, push
from bitoss.cli import main
from bitoss.kernel import Dist, FLOAT, Multiset, to_float
from bitoss.serialize import (
    dist_to_json,
    dumps,
    grid_to_json,
    multiset_from_json,
    multiset_to_json,
)

from conftest import EXAMPLE_COIN, MIXTURE_COINS, MIXTURE_WEIGHTS


@pytest.fixture
def coin_file(tmp_path):
    path = tmp_path / "coin.json"
    path.write_text(dumps(dist_to_json(EXAMPLE_COIN.dist)))
    return path


def run(*argv) -> int:
    return main([str(a) for a in argv])


class TestBivbin:
    def test_published_grid(self, tmp_path, coin_file, capsys):
        out = tmp_path / "grid.json"
        csv = tmp_path / "grid.csv"
        assert run("bivbin", "--coin", coin_file, "--K", 2, "--out", out, "--csv", csv) == 0
        doc = json.loads(out.read_text())
        assert doc["K"] == 2 and doc["N"] == 2
        cell = {
            tuple(e["point"]): Fraction(e["num"], e["den"]) for e in doc["entries"]
        }
        assert cell[(1, 1)] == Fraction(47, 288)
        assert cell[(0, 0)] == Fraction(9, 64)
        assert len(cell) == 9
        rows = csv.read_text().strip().split("\n")
        assert len(rows) == 3

    def test_zero_tosses(self, tmp_path, coin_file):
        out = tmp_path / "grid.json"
        assert run("bivbin", "--coin", coin_file, "--K", 0, "--out", out) == 0
        doc = json.loads(out.read_text())
        assert doc["entries"] == [{"den": 1, "num": 1, "point": [0, 0]}]

    def test_surface_mode_for_ten_tosses(self, tmp_path, coin_file):
        out = tmp_path / "grid.json"
        assert run("bivbin", "--coin", coin_file, "--K", 10, "--out", out) == 0
        doc = json.loads(out.read_text())
        best = max(doc["entries"], key=lambda e: Fraction(e["num"], e["den"]))
        assert tuple(best["point"]) == (2, 5)

    def test_malformed_input(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run("bivbin", "--coin", bad, "--K", 2, "--out", tmp_path / "o.json") == 2

    def test_missing_file(self, tmp_path):
        assert (
            run("bivbin", "--coin", tmp_path / "none.json", "--K", 2, "--out", tmp_path / "o.json")
            == 2
        )

    def test_dimension_flag_mismatch(self, tmp_path, coin_file):
        assert (
            run("bivbin", "--coin", coin_file, "--K", 2, "--n", 3, "--out", tmp_path / "o.json")
            == 2
        )

    def test_resource_limit(self, tmp_path, monkeypatch):
        coin3 = tmp_path / "coin3.json"
        eighth = Fraction(1, 8)
        faces = [(a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)]
        coin3.write_text(dumps(dist_to_json(Dist({p: eighth for p in faces}))))
        monkeypatch.setenv("BITOSS_MSET_CAP", "5")
        assert run("bivbin", "--coin", coin3, "--K", 3, "--out", tmp_path / "o.json") == 3


class TestSample:
    def test_zero_draws(self, tmp_path, coin_file):
        out = tmp_path / "s.json"
        assert run("sample", "--dist", coin_file, "--n", 0, "--seed", 1, "--out", out) == 0
        assert multiset_from_json(json.loads(out.read_text())) == Multiset()

    def test_point_mass(self, tmp_path):
        dist = tmp_path / "point.json"
        dist.write_text(dumps(dist_to_json(Dist({(3, 4): 1}))))
        out = tmp_path / "s.json"
        assert run("sample", "--dist", dist, "--n", 7, "--seed", 5, "--out", out) == 0
        assert multiset_from_json(json.loads(out.read_text())) == Multiset({(3, 4): 7})

    def test_byte_identical_reruns(self, tmp_path, coin_file):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            assert run("sample", "--dist", coin_file, "--n", 500, "--seed", 9, "--out", out) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_mixture_has_two_humps(self, tmp_path):
        tosses = 15
        chan = Channel(
            (0, 1),
            {i: to_float(bivbin(tosses, c).dist) for i, c in enumerate(MIXTURE_COINS)},
        )
        weights = Dist({i: float(w) for i, w in enumerate(MIXTURE_WEIGHTS)}, mode=FLOAT)
        sigma = push(chan, weights)
        dist = tmp_path / "mix.json"
        dist.write_text(dumps(dist_to_json(sigma)))
        out = tmp_path / "s.json"
        assert run("sample", "--dist", dist, "--n", 1000, "--seed", 42, "--out", out) == 0
        drawn = multiset_from_json(json.loads(out.read_text()))
        # the components separate along the first coordinate (means ~3.1 and 12)
        low = sum(m for p, m in drawn.items() if p[0] <= 7)
        assert drawn.size == 1000
        assert abs(low / 1000 - 1 / 3) < 0.05


class TestEm:
    def make_data(self, tmp_path, tosses=8, n=400):
        grid = to_float(bivbin(tosses, MIXTURE_COINS[0]).dist)
        from bitoss.kernel import sample

        data = sample(grid, n, 21)
        path = tmp_path / "data.json"
        path.write_text(dumps(multiset_to_json(data)))
        return path

    def test_single_class_recovers_generator(self, tmp_path):
        data = self.make_data(tmp_path)
        out, trace = tmp_path / "state.json", tmp_path / "trace.csv"
        code = run(
            "em", "--data", data, "--K", 8, "--classes", 1, "--iters", 4,
            "--seed", 3, "--out", out, "--trace", trace,
        )
        assert code == 0
        doc = json.loads(out.read_text())
        fitted = {tuple(e["point"]): e["p"] for e in doc["coins"][0]["entries"]}
        for p, v in MIXTURE_COINS[0].dist.items():
            assert abs(fitted[p] - float(v)) < 0.02
        lines = trace.read_text().strip().split("\n")
        assert lines[0] == "iteration,kl"
        assert len(lines) == 6

    def test_trace_json_and_decreasing_divergences(self, tmp_path):
        data = self.make_data(tmp_path)
        out, trace, tj = tmp_path / "s.json", tmp_path / "t.csv", tmp_path / "t.json"
        code = run(
            "em", "--data", data, "--K", 8, "--classes", 2, "--iters", 5,
            "--seed", 5, "--out", out, "--trace", trace, "--trace-json", tj,
        )
        assert code == 0
        doc = json.loads(tj.read_text())
        kls = [r["kl"] for r in doc["records"]]
        assert kls[-1] <= kls[0]

    def test_zero_iterations_usage_error(self, tmp_path):
        data = self.make_data(tmp_path)
        code = run(
            "em", "--data", data, "--K", 8, "--classes", 2, "--iters", 0,
            "--seed", 1, "--out", tmp_path / "o.json", "--trace", tmp_path / "t.csv",
        )
        assert code == 2

    def test_data_outside_grid(self, tmp_path):
        path = tmp_path / "data.json"
        path.write_text(dumps(multiset_to_json(Multiset({(30, 2): 5}))))
        code = run(
            "em", "--data", path, "--K", 8, "--classes", 2, "--iters", 2,
            "--seed", 1, "--out", tmp_path / "o.json", "--trace", tmp_path / "t.csv",
        )
        assert code == 4

    def test_byte_identical_reruns(self, tmp_path):
        data = self.make_data(tmp_path, n=200)
        outs = []
        for tag in "ab":
            out, trace = tmp_path / f"s{tag}.json", tmp_path / f"t{tag}.csv"
            assert (
                run(
                    "em", "--data", data, "--K", 8, "--classes", 2, "--iters", 3,
                    "--seed", 7, "--out", out, "--trace", trace,
                )
                == 0
            )
            outs.append((out.read_bytes(), trace.read_bytes()))
        assert outs[0] == outs[1]


class TestRecover:
    def test_round_trip_via_files(self, tmp_path, coin_file, capsys):
        grid_path = tmp_path / "grid.json"
        assert run("bivbin", "--coin", coin_file, "--K", 4, "--out", grid_path) == 0
        assert run("recover", "--grid", grid_path, "--K", 4) == 0
        doc = json.loads(capsys.readouterr().out)
        got = {tuple(e["point"]): Fraction(e["num"], e["den"]) for e in doc["entries"]}
        assert got == dict(EXAMPLE_COIN.dist.items())
        assert doc["clamped"] is False

    def test_point_mass_grid(self, tmp_path, capsys):
        grid_path = tmp_path / "grid.json"
        grid_path.write_text(dumps(grid_to_json(GridDist(3, 2, Dist({(0, 0): 1})))))
        assert run("recover", "--grid", grid_path, "--K", 3) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["entries"] == [{"den": 1, "num": 1, "point": [0, 0]}]

    def test_infeasible_grid_exits_five(self, tmp_path):
        grid = GridDist(2, 2, Dist({(2, 0): Fraction(1, 2), (0, 2): Fraction(1, 2)}))
        grid_path = tmp_path / "grid.json"
        grid_path.write_text(dumps(grid_to_json(grid)))
        assert run("recover", "--grid", grid_path, "--K", 2) == 5

    def test_infeasible_grid_clamped(self, tmp_path, capsys):
        grid = GridDist(2, 2, Dist({(2, 0): 0.5, (0, 2): 0.5}, mode=FLOAT))
        grid_path = tmp_path / "grid.json"
        grid_path.write_text(dumps(grid_to_json(grid)))
        assert run("recover", "--grid", grid_path, "--K", 2, "--clamp") == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["clamped"] is True
        total = sum(e["p"] for e in doc["entries"])
        assert total == pytest.approx(1.0)

    def test_k_mismatch_is_usage_error(self, tmp_path, coin_file):
        grid_path = tmp_path / "grid.json"
        assert run("bivbin", "--coin", coin_file, "--K", 4, "--out", grid_path) == 0
        assert run("recover", "--grid", grid_path, "--K", 5) == 2


class TestSuccession:
    def test_beta(self, capsys):
        assert run("succession", "beta", "--alpha", 1, "--beta", 1, "--K", 10, "--n", 10) == 0
        assert json.loads(capsys.readouterr().out)["mean"] == "11/12"

    def test_poisson_binomial(self, capsys):
        assert run("succession", "poisson-binomial", "--r", 0.5, "--rate", 2, "--n", 3) == 0
        assert json.loads(capsys.readouterr().out)["mean"] == 4.0

    def test_bivbin_dirichlet_uniform(self, tmp_path, capsys):
        psi = tmp_path / "psi.json"
        psi.write_text(
            dumps(multiset_to_json(Multiset({p: 1 for p in EXAMPLE_COIN.dist.support()})))
        )
        assert run("succession", "bivbin-dirichlet", "--psi", psi, "--K", 2, "--n1", 1, "--n2", 1) == 0
        doc = json.loads(capsys.readouterr().out)
        assert all(e["num"] == 1 and e["den"] == 4 for e in doc["mean"]["entries"])

    def test_dirichlet(self, tmp_path, capsys):
        psi = tmp_path / "psi.json"
        draw = tmp_path / "draw.json"
        psi.write_text(dumps(multiset_to_json(Multiset({0: 1, 1: 1}))))
        draw.write_text(dumps(multiset_to_json(Multiset({1: 2}))))
        assert run("succession", "dirichlet", "--psi", psi, "--draw", draw) == 0
        doc = json.loads(capsys.readouterr().out)
        got = {tuple(e["point"])[0] if len(e["point"]) > 1 else e["point"][0]:
               Fraction(e["num"], e["den"]) for e in doc["mean"]["entries"]}
        assert got == {0: Fraction(1, 4), 1: Fraction(3, 4)}

    def test_poisson_bivbin(self, tmp_path, coin_file, capsys):
        assert run(
            "succession", "poisson-bivbin", "--coin", coin_file, "--rate", 3, "--n1", 1, "--n2", 2
        ) == 0
        mean = json.loads(capsys.readouterr().out)["mean"]
        assert mean == pytest.approx(3.419117647058824, abs=1e-12)

    def test_bad_params(self, capsys):
        assert run("succession", "beta", "--alpha", 0, "--beta", 1, "--K", 1, "--n", 0) == 2


class TestUsage:
    def test_unknown_subcommand(self, capsys):
        assert run("bogus") == 2

    def test_unknown_flag(self, capsys):
        assert run("sample", "--nope", 1) == 2

    def test_no_arguments(self, capsys):
        assert run() == 2
