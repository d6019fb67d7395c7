import hashlib
import json
import math

import numpy as np
import pytest

from thermoflow.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from thermoflow.experiments import (
    ConfigError,
    DEFAULT_MASTER_SEED,
    NumericError,
    canonical_config_hash,
    resolve_config,
    run_experiment,
    sweep,
)
from thermoflow.seeding import derive_seed, rng_for, splitmix64


# ---------------------------------------------------------------------------
# Seed derivation
# ---------------------------------------------------------------------------

def test_splitmix64_known_values():
    # reference outputs of the standard SplitMix64 sequence from seed 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert splitmix64(0x9E3779B97F4A7C15) == 0x6E789E6AA1B965F4


def test_derive_seed_separates_tags_and_indices():
    seeds = {
        derive_seed(1, "a", 0),
        derive_seed(1, "a", 1),
        derive_seed(1, "b", 0),
        derive_seed(2, "a", 0),
    }
    assert len(seeds) == 4
    assert derive_seed(1, "a", 0) == derive_seed(1, "a", 0)
    assert all(0 <= s < 2**64 for s in seeds)


def test_rng_for_reproduces_streams():
    a = rng_for(7, "x", 3).random(5)
    b = rng_for(7, "x", 3).random(5)
    np.testing.assert_array_equal(a, b)


# ---------------------------------------------------------------------------
# Config resolution
# ---------------------------------------------------------------------------

def test_resolve_applies_documented_defaults():
    cfg = resolve_config({"experiment": "fig3-loss"})
    assert cfg["master_seed"] == DEFAULT_MASTER_SEED
    assert cfg["workers"] == 1
    assert cfg["parameters"]["alpha"] == 0.5
    assert abs(cfg["parameters"]["temperature"] - 1.0 / math.log(2.0)) < 1e-15


@pytest.mark.parametrize(
    "raw",
    [
        {"experiment": "fig3-loss", "bogus": 1},
        {"experiment": "no-such-experiment"},
        {"experiment": "fig3-loss", "parameters": {"alpa": 0.5}},
        {"experiment": "fig3-loss", "parameters": {"alpha": "half"}},
        {"experiment": "fig4-histograms", "parameters": {"runs": 10.5}},
        {"experiment": "fig3-loss", "master_seed": -1},
        {"experiment": "fig3-loss", "master_seed": True},
        {"experiment": "fig3-loss", "workers": 0},
        {"experiment": "custom"},
        {"experiment": "custom", "parameters": {"op": "no-such-op"}},
        {"experiment": "fig3-loss", "sweep": {"axis": "nope", "values": [1]}},
        {"experiment": "fig3-loss", "sweep": {"axis": "alpha"}},
    ],
)
def test_resolve_rejects_invalid_configs(raw):
    with pytest.raises(ConfigError):
        resolve_config(raw)


def test_canonical_hash_is_key_order_invariant():
    a = canonical_config_hash({"x": 1, "y": [1, 2]})
    b = canonical_config_hash({"y": [1, 2], "x": 1})
    assert a == b and len(a) == 64


# ---------------------------------------------------------------------------
# Experiment runs
# ---------------------------------------------------------------------------

def fig3_config(out, grid=(10, 100, 1000)):
    return {
        "experiment": "fig3-loss",
        "parameters": {"N_grid": list(grid)},
        "output_dir": str(out),
    }


def test_fig3_run_writes_outputs_and_manifest(tmp_path):
    manifest = run_experiment(fig3_config(tmp_path / "o"))
    csv_path = tmp_path / "o" / "fig3_loss.csv"
    assert csv_path.exists()
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "N,epsilon_exact,epsilon_bound"
    assert len(lines) == 4
    for line in lines[1:]:
        n, eps, bound = line.split(",")
        assert float(eps) < float(bound)
        # floats round-trip exactly at 17 significant digits
        assert float(eps) == float(format(float(eps), ".17g"))
    # manifest digests match the files on disk
    data = json.loads((tmp_path / "o" / "manifest.json").read_text())
    for entry in data["outputs"]:
        blob = (tmp_path / "o" / entry["filename"]).read_bytes()
        assert hashlib.sha256(blob).hexdigest() == entry["sha256"]
        assert blob.endswith(b"\n") and b"\r" not in blob


def test_fig4_worker_count_independence(tmp_path):
    base = {
        "experiment": "fig4-histograms",
        "parameters": {"N_values": [50], "runs": 1200},
    }
    hashes = {}
    for workers in (1, 4):
        cfg = dict(base, workers=workers, output_dir=str(tmp_path / f"w{workers}"))
        manifest = run_experiment(cfg)
        hashes[workers] = {name: digest for name, _, digest in manifest.outputs}
    assert hashes[1] == hashes[4]


def test_fig4_summary_contents(tmp_path):
    cfg = {
        "experiment": "fig4-histograms",
        "parameters": {"N_values": [50], "runs": 1500},
        "output_dir": str(tmp_path / "o"),
    }
    run_experiment(cfg)
    lines = (tmp_path / "o" / "fig4_summary.csv").read_text().splitlines()
    header = lines[0].split(",")
    row = dict(zip(header, lines[1].split(",")))
    assert int(row["runs"]) == 1500
    assert abs(float(row["mean"]) - float(row["mean_exact"])) <= 4.0 * float(row["mean_stderr"])
    hist = (tmp_path / "o" / "fig4_hist_N50.csv").read_text().splitlines()
    assert hist[0] == "bin_left,bin_right,count"
    counts = sum(int(line.split(",")[2]) for line in hist[1:])
    assert counts <= 1500


def test_custom_op_emits_ledger_json(tmp_path):
    cfg = {
        "experiment": "custom",
        "parameters": {"op": "work-moments", "N": 40},
        "output_dir": str(tmp_path / "o"),
    }
    run_experiment(cfg)
    ledger = json.loads((tmp_path / "o" / "custom_ledger.json").read_text())
    assert set(ledger) >= {"cumulative_work", "mean", "variance", "per_step_work"}
    assert len(ledger["per_step_work"]) == 40
    assert ledger["variance"] >= 0.0


def test_json_format_renders_tables_as_json(tmp_path):
    cfg = fig3_config(tmp_path / "o")
    run_experiment(cfg, output_format="json")
    rows = json.loads((tmp_path / "o" / "fig3_loss.json").read_text())
    assert len(rows) == 3 and {"N", "epsilon_exact", "epsilon_bound"} == set(rows[0])


def test_qudit_convergence_accepts_endpoint_matrices(tmp_path):
    cfg = {
        "experiment": "qudit-convergence",
        "parameters": {
            "H0": [[0.0, 0.0], [0.0, 1.6]],
            "H1": [[0.0, [0.0, 0.0]], [[0.0, -0.0], 0.3]],  # [re, im] entries allowed
            "N_values": [500, 1000],
        },
        "output_dir": str(tmp_path / "o"),
    }
    run_experiment(cfg)
    lines = (tmp_path / "o" / "qudit_convergence.csv").read_text().splitlines()
    assert lines[0] == "N,alpha,W_exact,W_dis_exact,W_dis_predicted"
    assert len(lines) == 3
    with pytest.raises(ConfigError):
        bad = dict(cfg, parameters={"H0": [[0.0]]}, output_dir=str(tmp_path / "o2"))
        run_experiment(bad)


def test_numeric_gate_failure_raises(tmp_path):
    # a duplicated grid point breaks the strict-decrease gate deterministically
    cfg = fig3_config(tmp_path / "o", grid=(100, 100))
    with pytest.raises(NumericError):
        run_experiment(cfg)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def test_sweep_single_value_is_byte_identical(tmp_path):
    plain = run_experiment(fig3_config(tmp_path / "plain"))
    swept = sweep(fig3_config(tmp_path / "swept"), "alpha", [0.5])
    plain_bytes = (tmp_path / "plain" / "fig3_loss.csv").read_bytes()
    swept_bytes = (tmp_path / "swept" / "sweep-alpha" / "alpha=0.5" / "fig3_loss.csv").read_bytes()
    assert plain_bytes == swept_bytes
    assert [name for name, _, _ in swept.outputs] == ["sweep-alpha/alpha=0.5/fig3_loss.csv"]


def test_sweep_produces_row_group_per_value(tmp_path):
    manifest = sweep(fig3_config(tmp_path / "s"), "alpha", [0.0, 0.25, 0.5, 0.75])
    groups = {name.split("/")[1] for name, _, _ in manifest.outputs}
    assert groups == {"alpha=0.0", "alpha=0.25", "alpha=0.5", "alpha=0.75"}
    for value in (0.25, 0.75):
        table = (tmp_path / "s" / "sweep-alpha" / f"alpha={value}" / "fig3_loss.csv").read_text()
        assert table.startswith("N,epsilon_exact")


def test_sweep_axis_must_exist(tmp_path):
    with pytest.raises(ConfigError):
        sweep(fig3_config(tmp_path / "s"), "definitely-not-a-knob", [1])


def test_sweep_over_qudit_ladder(tmp_path):
    cfg = {
        "experiment": "qudit-convergence",
        "parameters": {"N_values": [250]},
        "output_dir": str(tmp_path / "s"),
    }
    manifest = sweep(cfg, "N_values", [[250], [500]])
    names = {name for name, _, _ in manifest.outputs}
    assert names == {
        "sweep-N_values/N_values=[250]/qudit_convergence.csv",
        "sweep-N_values/N_values=[500]/qudit_convergence.csv",
    }


def test_sweep_key_inside_config_delegates(tmp_path):
    cfg = fig3_config(tmp_path / "s")
    cfg["sweep"] = {"axis": "alpha", "values": [0.25, 0.5]}
    manifest = run_experiment(cfg)
    groups = {name.split("/")[1] for name, _, _ in manifest.outputs}
    assert groups == {"alpha=0.25", "alpha=0.5"}


# ---------------------------------------------------------------------------
# Command-line entry point
# ---------------------------------------------------------------------------

def test_cli_happy_path(tmp_path, capsys):
    code = main(
        [
            "--experiment",
            "fig3-loss",
            "--set",
            "N_grid=[10,100]",
            "--out",
            str(tmp_path / "o"),
        ]
    )
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "fig3_loss.csv" in out and "config hash:" in out


def test_cli_config_file_plus_overrides(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"experiment": "fig3-loss", "parameters": {"N_grid": [10, 50]}}))
    code = main(["--config", str(cfg_path), "--set", "alpha=0.25", "--out", str(tmp_path / "o"), "--seed", "42"])
    assert code == EXIT_OK
    assert (tmp_path / "o" / "fig3_loss.csv").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["--experiment", "custom"],  # missing required op
        ["--experiment", "fig3-loss", "--set", "alpa=1"],  # misspelled key
        ["--config", "/nonexistent/path.json"],
        [],  # no experiment at all
    ],
)
def test_cli_config_errors_exit_2(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_cli_numeric_failure_exits_3(tmp_path, capsys):
    code = main(
        ["--experiment", "fig3-loss", "--set", "N_grid=[100,100]", "--out", str(tmp_path / "o")]
    )
    assert code == EXIT_NUMERIC
    assert "numeric failure" in capsys.readouterr().err


@pytest.mark.parametrize(
    "experiment,expected",
    [
        ("fig3-loss", ["fig3_loss.csv"]),
        ("fig4-histograms", ["fig4_summary.csv", "fig4_hist_N100.csv", "fig4_hist_N1000.csv"]),
        ("qudit-convergence", ["qudit_convergence.csv"]),
        ("breakdown-scaling", ["breakdown_scaling.csv"]),
        ("fig5-fig6-tth", ["tth_cosine.csv", "tth_exponential.csv", "tth_optimum.json"]),
    ],
)
def test_default_presets_run_clean(experiment, expected, tmp_path):
    # every preset at its documented defaults completes with its gates green
    cfg = {"experiment": experiment, "output_dir": str(tmp_path / "o")}
    run_experiment(cfg)
    for name in expected:
        assert (tmp_path / "o" / name).exists()


def test_cli_workers_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("THERMOFLOW_WORKERS", "2")
    code = main(["--experiment", "fig3-loss", "--set", "N_grid=[10,100]", "--out", str(tmp_path / "o")])
    assert code == EXIT_OK
    monkeypatch.setenv("THERMOFLOW_WORKERS", "zebra")
    assert main(["--experiment", "fig3-loss", "--out", str(tmp_path / "o")]) == EXIT_CONFIG
