import json

import numpy as np
import pytest

from haarlab.bmo import bmo_norm, default_family
from haarlab.experiments import (GENERATORS, ConfigError, ExperimentConfig, SymbolSpec,
                                 entry_symbol, generate_symbol, lower_bound_reduction_check,
                                 random_scalar_symbol, report_json, run_suite,
                                 sandwich_experiment, sandwich_summary)
from haarlab.grid import cancellative_mask


def test_single_rectangle_has_one_coefficient():
    A = np.array([[1, 2j], [3, 4]])
    B = generate_symbol(SymbolSpec("single-rectangle", rect=(3, 5), matrix=A), 3, 2)
    nz = np.argwhere(np.abs(B).sum(axis=(2, 3)) > 0)
    assert nz.tolist() == [[3, 5]]
    np.testing.assert_array_equal(B[3, 5], A)


def test_single_rectangle_rejects_mean_slot():
    with pytest.raises(ValueError):
        generate_symbol(SymbolSpec("single-rectangle", rect=(0, 2)), 3, 1)


def test_scalar_embedded_coefficients():
    rng = np.random.default_rng(5)
    b = random_scalar_symbol(3, rng)
    B = generate_symbol(SymbolSpec("scalar-embedded", scalar=b, i=0, j=1), 3, 2)
    BB = B @ np.conj(np.swapaxes(B, -1, -2))
    E11 = np.array([[1, 0], [0, 0]])
    np.testing.assert_allclose(BB, np.abs(b)[..., None, None] ** 2 * E11, atol=1e-14)


@pytest.mark.parametrize("kind", GENERATORS)
def test_generators_deterministic_and_cancellative(kind):
    a = generate_symbol(kind, 3, 2, seed=11)
    b = generate_symbol(kind, 3, 2, seed=11)
    np.testing.assert_array_equal(a, b)
    assert not np.abs(a * ~cancellative_mask(3)[..., None, None]).max() > 0
    assert np.abs(a).max() > 0


def test_rank_one_and_diagonal_structure():
    R = generate_symbol("rank-one", 3, 3, seed=1)
    s = np.linalg.svd(R[1:, 1:], compute_uv=False)
    assert (s[..., 1:] < 1e-12 * s[..., :1]).all()
    D = generate_symbol("diagonal-scalars", 3, 3, seed=1)
    off = D * (1 - np.eye(3))
    assert not np.abs(off).max() > 0


def test_unknown_generator():
    with pytest.raises(ValueError):
        generate_symbol("lognormal", 3, 1)


@pytest.mark.parametrize("changes", [dict(trials=0), dict(depth=11), dict(dim=9), dict(depth=0),
                                     dict(backend="wavelet"), dict(generator="x"),
                                     dict(tolerance=0.0)])
def test_config_validation(changes):
    with pytest.raises(ConfigError):
        ExperimentConfig(**changes)


def test_config_from_mapping():
    cfg = ExperimentConfig.from_mapping({"depth": 4, "dim": 2, "seed": 9})
    assert (cfg.depth, cfg.dim, cfg.seed, cfg.trials) == (4, 2, 9, 10)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"depht": 4})
    assert cfg.replace(dim=None, trials=3).trials == 3


def test_trial_seeds_are_stable():
    cfg = ExperimentConfig(seed=4, trials=3)
    a = [r.standard_normal() for r in cfg.trial_rngs()]
    b = [r.standard_normal() for r in cfg.trial_rngs()]
    assert a == b and len(set(a)) == 3


def test_sandwich_constant_symbol_is_degenerate():
    cfg = ExperimentConfig(depth=3, dim=2, trials=1)
    B = np.zeros((8, 8, 2, 2), dtype=complex)
    B[0, 0] = np.eye(2)
    recs = sandwich_experiment(cfg, symbols=[B, generate_symbol("random-gaussian", 3, 2, 1)])
    assert recs[0].degenerate and recs[0].ratio is None and recs[0].comm_norm < 1e-12
    assert not recs[1].degenerate and recs[1].ratio > 0
    s = sandwich_summary(recs)["shift"]
    assert s["degenerate"] == 1 and s["min"] == s["max"] == recs[1].ratio
    assert "NaN" not in report_json({"r": [r.to_dict() for r in recs]})


def test_sandwich_envelope_scalar():
    cfg = ExperimentConfig(depth=3, dim=1, trials=50, seed=2)
    recs = sandwich_experiment(cfg)
    s = sandwich_summary(recs)["shift"]
    ratios = [r.ratio for r in recs]
    assert all(s["min"] <= x <= s["max"] for x in ratios)
    assert s["spread"] == pytest.approx(s["max"] / s["min"])
    assert all(r.comm_norm >= 0 and r.bmo >= 0 for r in recs)
    # d = 1: the single entry norm is the full norm
    assert all(r.entry_norms[0][0] == pytest.approx(r.comm_norm, rel=1e-10) for r in recs)


def test_sandwich_both_backends_recorded():
    cfg = ExperimentConfig(depth=3, dim=2, trials=2)
    recs = sandwich_experiment(cfg, backends=("shift", "hilbert"), entry_norms=False)
    assert [(r.trial, r.backend) for r in recs] == [(0, "shift"), (0, "hilbert"), (1, "shift"), (1, "hilbert")]
    assert recs[0].bmo == recs[1].bmo


def test_lower_bound_diagonal_equal_entries():
    b = random_scalar_symbol(3, np.random.default_rng(2))
    B = np.zeros((8, 8, 2, 2), dtype=complex)
    B[..., 0, 0] = B[..., 1, 1] = b
    rep = lower_bound_reduction_check(B, trials=2)
    E = np.array(rep["entry_comm_norms"])
    assert E[0, 0] == pytest.approx(E[1, 1], rel=1e-12)
    assert E[0, 0] == pytest.approx(rep["comm_norm"], rel=1e-10)   # inequality is tight
    assert E[0, 1] == 0 and E[1, 0] == 0
    assert rep["pairing_ok"] and rep["norm_ineq_ok"] and rep["chain_ok"]


def test_single_entry_bmo_equals_scalar_bmo():
    rng = np.random.default_rng(8)
    b = random_scalar_symbol(3, rng)
    B = generate_symbol(SymbolSpec("scalar-embedded", scalar=b, i=1, j=0), 3, 3)
    fam = default_family(3)
    assert bmo_norm(B, fam).openset_norm == pytest.approx(
        bmo_norm(b[..., None, None], fam).openset_norm, rel=1e-12)
    np.testing.assert_array_equal(entry_symbol(B, 1, 0), B)


@pytest.mark.parametrize("backend", ["shift", "hilbert"])
def test_lower_bound_random(backend):
    B = generate_symbol("random-gaussian", 3, 2, seed=3)
    rep = lower_bound_reduction_check(B, trials=3, backend=backend)
    assert rep["pairing_max_rel_err"] <= 1e-10
    assert rep["norm_ineq_ok"] and rep["chain_ok"]
    assert rep["ratio"] > 0 and rep["ratio_times_d2"] == pytest.approx(4 * rep["ratio"])


def test_run_suite_identities_passes(tmp_path):
    out = tmp_path / "r.json"
    status, rep = run_suite("identities", ExperimentConfig(depth=3, dim=1, trials=3, out=str(out)))
    assert status == 0
    assert all(c["value"] <= 1e-10 for c in rep["sections"]["identities"]["checks"])
    assert json.loads(out.read_text())["passed"] is True


def test_run_suite_all_has_every_section():
    status, rep = run_suite("all", ExperimentConfig(depth=2, dim=1, trials=2))
    assert status == 0
    assert set(rep["sections"]) == {"identities", "paraproducts", "bmo", "sandwich",
                                    "lower-bound", "petermichl"}


def test_report_reproducible_modulo_timestamp(tmp_path):
    texts = []
    for k in range(2):
        cfg = ExperimentConfig(depth=3, dim=2, trials=2, seed=5, out=str(tmp_path / f"{k}.json"))
        run_suite("bmo", cfg)
        doc = json.loads((tmp_path / f"{k}.json").read_text())
        doc.pop("timestamp")
        doc["config"].pop("out")
        texts.append(json.dumps(doc, sort_keys=True))
    assert texts[0] == texts[1]


def test_failing_check_gives_status_one(monkeypatch):
    from haarlab import experiments

    def broken(cfg, ctx):
        sec = experiments.Section()
        sec.check("always_fails", 1.0, 0.0)
        return sec

    monkeypatch.setitem(experiments._SUITE_FUNCS, "identities", broken)
    status, rep = run_suite("identities", ExperimentConfig(trials=1))
    assert status == 1 and rep["failures"][0]["name"] == "always_fails"


def test_unknown_suite():
    with pytest.raises(ConfigError):
        run_suite("everything")
