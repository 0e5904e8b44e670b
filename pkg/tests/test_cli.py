import csv
import json

import numpy as np
import pytest

from foglink.cli import (
    EXIT_OK,
    EXIT_PARSE,
    EXIT_TRAINING,
    EXIT_VALIDATION,
    RunConfig,
    load_config,
    main,
)
from foglink.dataset import parse_visibility_csv
from foglink.serialize import save_model
from foglink.tables import LabeledTable
from foglink.tree import fit_regression_tree

FAST_PIPELINE = """
sample_records = 30
wavelengths_nm = 760,1550
tx_powers_w = 0.01,0.1
rf_trees = 4
gbr_stages = 10
gbr_max_depth = 3
adbr_rounds = 3
stack_folds = 2
mlp_epochs = 5
"""


def read_csv(path):
    with open(path) as handle:
        return list(csv.DictReader(handle))


def write_cfg(tmp_path, text, name="run.cfg"):
    cfg = tmp_path / name
    cfg.write_text(text)
    return str(cfg)


class TestConfig:
    def test_defaults_load_without_file(self):
        assert load_config(None) == RunConfig()

    def test_overrides_and_comments(self, tmp_path):
        path = write_cfg(tmp_path, "# comment\nrf_trees = 7\nwavelengths_nm = 850,1550\n")
        cfg = load_config(path)
        assert cfg.rf_trees == 7
        assert cfg.wavelengths_nm == (850.0, 1550.0)

    def test_unknown_keys_listed(self, tmp_path):
        path = write_cfg(tmp_path, "rf_trees = 7\nbogus_key = 3\nworse = x\n")
        with pytest.raises(ValueError, match="bogus_key"):
            load_config(path)

    def test_example_config_file_parses_to_defaults(self):
        assert load_config("configs/default.cfg") == RunConfig()


class TestAttenuationSweep:
    def test_single_cell_anchor(self, tmp_path):
        cfg = write_cfg(tmp_path, "visibility_min_km = 1\nvisibility_max_km = 1\n"
                                  "wavelengths_nm = 1550\n")
        assert main(["attenuation-sweep", "--config", cfg,
                     "--out-dir", str(tmp_path)]) == EXIT_OK
        rows = read_csv(tmp_path / "attenuation_sweep.csv")
        assert len(rows) == 1
        assert float(rows[0]["beta_per_km"]) == pytest.approx(2.13, abs=0.01)

    def test_grid_shape_and_monotonicity(self, tmp_path):
        cfg = write_cfg(tmp_path, "visibility_min_km = 1\nvisibility_max_km = 3\n"
                                  "visibility_step_km = 0.5\nwavelengths_nm = 760,1550\n")
        assert main(["attenuation-sweep", "--config", cfg,
                     "--out-dir", str(tmp_path)]) == EXIT_OK
        rows = read_csv(tmp_path / "attenuation_sweep.csv")
        assert len(rows) == 5 * 2
        for lam in ("760.0", "1550.0"):
            betas = [float(r["beta_per_km"]) for r in rows if r["wavelength_nm"] == lam]
            assert all(a > b for a, b in zip(betas, betas[1:]))

    def test_deterministic_bytes(self, tmp_path):
        for sub in ("a", "b"):
            assert main(["attenuation-sweep", "--out-dir", str(tmp_path / sub)]) == EXIT_OK
        assert (tmp_path / "a/attenuation_sweep.csv").read_bytes() == \
            (tmp_path / "b/attenuation_sweep.csv").read_bytes()


@pytest.fixture(scope="module")
def sweep_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    cfg = out / "cfg"
    cfg.write_text("range_max_km = 2\natten_max_db_per_km = 10\n")
    assert main(["link-sweep", "--config", str(cfg), "--out-dir", str(out)]) == EXIT_OK
    return out


class TestLinkSweep:
    def test_all_figure_families_emitted(self, sweep_dir):
        for name in ("data_rate_vs_attenuation", "received_power_vs_range",
                     "ber_vs_attenuation", "capacity_vs_range",
                     "power_penalty_vs_range"):
            assert (sweep_dir / f"{name}.csv").exists()

    def test_ber_increases_with_attenuation_per_power(self, sweep_dir):
        rows = read_csv(sweep_dir / "ber_vs_attenuation.csv")
        by_power = {}
        for r in rows:
            by_power.setdefault(r["tx_power_w"], []).append(float(r["ber_nrz"]))
        for series in by_power.values():
            assert all(a <= b for a, b in zip(series, series[1:]))
            # strict once the BER is representable (erfc underflows to 0 at
            # very high SNR)
            positive = [v for v in series if v > 0]
            assert len(positive) >= 2
            assert all(a < b for a, b in zip(positive, positive[1:]))

    def test_dense_fog_penalty_dominates_light(self, sweep_dir):
        rows = read_csv(sweep_dir / "power_penalty_vs_range.csv")
        dense = {r["range_km"]: float(r["power_penalty_db"])
                 for r in rows if r["fog_class"] == "dense"}
        light = {r["range_km"]: float(r["power_penalty_db"])
                 for r in rows if r["fog_class"] == "light"}
        assert dense.keys() == light.keys()
        assert all(dense[k] > light[k] for k in dense)

    def test_capacity_recomputes_from_snr_column(self, sweep_dir):
        from foglink.link_budget import channel_capacity, db_to_linear
        rows = read_csv(sweep_dir / "capacity_vs_range.csv")
        sample = rows[::17]
        for r in sample:
            expected = channel_capacity(1e9, db_to_linear(float(r["snr_db"])))
            assert float(r["capacity_bps"]) == pytest.approx(expected, rel=1e-12)

    def test_received_power_nonincreasing_in_range(self, sweep_dir):
        rows = read_csv(sweep_dir / "received_power_vs_range.csv")
        series = [float(r["received_power_w"]) for r in rows
                  if r["wavelength_nm"] == "1550.0"]
        assert all(a >= b for a, b in zip(series, series[1:]))


class TestSynthData:
    def test_output_parses_and_is_deterministic(self, tmp_path):
        for sub in ("a", "b"):
            assert main(["synth-data", "--days", "4", "--seed", "11",
                         "--stations", "George,Kimberley",
                         "--out-dir", str(tmp_path / sub)]) == EXIT_OK
        text_a = (tmp_path / "a/visibility.csv").read_text()
        assert text_a == (tmp_path / "b/visibility.csv").read_text()
        records = parse_visibility_csv(text_a.splitlines()).records
        assert len(records) == 4 * 3 * 2
        assert {r.station for r in records} == {"George", "Kimberley"}

    def test_unknown_station_rejected(self, tmp_path):
        assert main(["synth-data", "--days", "2", "--stations", "Atlantis",
                     "--out-dir", str(tmp_path)]) == EXIT_VALIDATION


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """A small end-to-end train run shared by the pipeline tests."""
    root = tmp_path_factory.mktemp("pipeline")
    cfg = root / "fast.cfg"
    cfg.write_text(FAST_PIPELINE)
    assert main(["synth-data", "--days", "20", "--seed", "5",
                 "--out-dir", str(root)]) == EXIT_OK
    data = root / "visibility.csv"
    out = root / "run"
    code = main(["train", "--data", str(data), "--config", str(cfg),
                 "--seed", "5", "--out-dir", str(out)])
    assert code == EXIT_OK
    return {"root": root, "cfg": cfg, "data": data, "out": out}


class TestTrain:
    def test_manifest_lists_five_models(self, trained):
        manifest = json.loads((trained["out"] / "manifest.json").read_text())
        assert sorted(manifest["models"]) == ["adbr", "gbr", "mlp", "rf", "stacked"]
        for entry in manifest["models"].values():
            assert (trained["out"] / entry["file"]).exists()
            assert entry["hyperparameters"]
        assert manifest["failures"] == {}

    def test_training_log_has_mlp_epochs_and_stack_weights(self, trained):
        rows = read_csv(trained["out"] / "training_log.csv")
        events = {(r["model"], r["event"]) for r in rows}
        assert ("mlp", "train_loss") in events
        assert ("stacked", "weight") in events
        assert ("rf", "oob_mse") in events

    def test_retrain_is_byte_identical(self, trained, tmp_path):
        out2 = tmp_path / "again"
        assert main(["train", "--data", str(trained["data"]), "--config",
                     str(trained["cfg"]), "--seed", "5", "--out-dir", str(out2)]) == EXIT_OK
        for name in ("manifest.json", "training_log.csv", "models/rf.json",
                     "models/gbr.json", "models/adbr.json", "models/stacked.json",
                     "models/mlp.json"):
            assert (trained["out"] / name).read_bytes() == (out2 / name).read_bytes()

    @pytest.mark.filterwarnings("ignore:overflow", "ignore:invalid value")
    def test_failed_model_reported_and_rest_survive(self, tmp_path, trained):
        cfg = tmp_path / "broken.cfg"
        cfg.write_text(FAST_PIPELINE + "mlp_learning_rate = 1e9\n")  # guaranteed divergence
        out = tmp_path / "broken"
        code = main(["train", "--data", str(trained["data"]), "--config", str(cfg),
                     "--seed", "5", "--out-dir", str(out)])
        assert code == EXIT_TRAINING
        manifest = json.loads((out / "manifest.json").read_text())
        assert "mlp" in manifest["failures"]
        assert sorted(manifest["models"]) == ["adbr", "gbr", "rf", "stacked"]

    def test_requires_data_or_synth(self, tmp_path):
        assert main(["train", "--out-dir", str(tmp_path)]) == EXIT_VALIDATION


class TestEvaluate:
    def test_metrics_schema_and_scores(self, trained):
        assert main(["evaluate", "--data", str(trained["data"]),
                     "--out-dir", str(trained["out"])]) == EXIT_OK
        with open(trained["out"] / "metrics.csv") as handle:
            header = handle.readline().strip().split(",")
        assert header == ["model", "location", "n", "MSE", "MAE", "MAPE", "RMSE", "R2"]
        rows = read_csv(trained["out"] / "metrics.csv")
        overall = {r["model"]: float(r["R2"]) for r in rows if r["location"] == "all"}
        assert set(overall) == {"adbr", "gbr", "mlp", "rf", "stacked"}
        assert overall["rf"] > 0.5  # tiny run, loose sanity bound
        predictions = read_csv(trained["out"] / "predictions.csv")
        assert set(predictions[0]) == {"model", "location", "row", "actual", "predicted"}

    def test_identity_oracle_scores_perfectly(self, trained, tmp_path):
        out = trained["out"]
        manifest = json.loads((out / "manifest.json").read_text())
        # memorise the whole rebuilt table, then score it on the test rows
        from foglink.cli import _build_table, _load_records
        import argparse
        cfg = load_config(str(trained["cfg"]))
        ns = argparse.Namespace(data=str(trained["data"]), synth_days=None,
                                stations=None, seed=manifest["seed"])
        records, _ = _load_records(ns, cfg)
        qos = _build_table(records, cfg)
        oracle = fit_regression_tree(qos.table, 1)
        save_model(oracle, out / "models" / "oracle.json")
        manifest["models"]["oracle"] = {"file": "models/oracle.json",
                                        "hyperparameters": {"min_leaf_size": 1}}
        patched = out / "manifest_oracle.json"  # beside models/ so paths resolve
        patched.write_text(json.dumps(manifest, sort_keys=True))
        eval_out = tmp_path / "eval"
        assert main(["evaluate", "--data", str(trained["data"]),
                     "--manifest", str(patched), "--out-dir", str(eval_out)]) == EXIT_OK
        rows = read_csv(eval_out / "metrics.csv")
        oracle_all = next(r for r in rows if r["model"] == "oracle" and r["location"] == "all")
        assert float(oracle_all["R2"]) == pytest.approx(1.0, abs=1e-12)
        assert float(oracle_all["RMSE"]) == pytest.approx(0.0, abs=1e-12)

    def test_missing_model_file_itemised(self, trained, tmp_path):
        manifest = json.loads((trained["out"] / "manifest.json").read_text())
        manifest["models"]["ghost"] = {"file": "models/ghost.json", "hyperparameters": {}}
        patched = tmp_path / "manifest.json"
        patched.write_text(json.dumps(manifest))
        assert main(["evaluate", "--data", str(trained["data"]),
                     "--manifest", str(patched), "--out-dir", str(tmp_path)]) == EXIT_VALIDATION


class TestPredict:
    @pytest.fixture
    def tree_file(self, tmp_path):
        rng = np.random.default_rng(0)
        X = rng.uniform(size=(12, 2))
        y = rng.uniform(size=12)
        model = fit_regression_tree(LabeledTable(X, y, ("u", "v")), 1)
        path = tmp_path / "tree.json"
        save_model(model, path)
        return path, X, y

    def test_memorising_tree_returns_targets(self, tree_file, tmp_path):
        path, X, y = tree_file
        feats = tmp_path / "feats.csv"
        lines = ["u,v"] + [f"{float(a)!r},{float(b)!r}" for a, b in X]
        feats.write_text("\n".join(lines) + "\n")
        out = tmp_path / "pred.csv"
        assert main(["predict", "--model", str(path), "--features", str(feats),
                     "--out", str(out)]) == EXIT_OK
        rows = read_csv(out)
        assert [float(r["prediction"]) for r in rows] == pytest.approx(list(y), rel=1e-12)

    def test_reordered_columns_refused(self, tree_file, tmp_path):
        path, X, _ = tree_file
        feats = tmp_path / "feats.csv"
        feats.write_text("v,u\n0.5,0.5\n")
        assert main(["predict", "--model", str(path), "--features", str(feats),
                     "--out", str(tmp_path / "pred.csv")]) == EXIT_VALIDATION

    def test_empty_feature_file_gives_empty_output(self, tree_file, tmp_path):
        path, _, _ = tree_file
        feats = tmp_path / "feats.csv"
        feats.write_text("u,v\n")
        out = tmp_path / "pred.csv"
        assert main(["predict", "--model", str(path), "--features", str(feats),
                     "--out", str(out)]) == EXIT_OK
        assert out.read_text() == "u,v,prediction\n"

    def test_bad_number_is_parse_error(self, tree_file, tmp_path):
        path, _, _ = tree_file
        feats = tmp_path / "feats.csv"
        feats.write_text("u,v\n0.5,banana\n")
        assert main(["predict", "--model", str(path), "--features", str(feats),
                     "--out", str(tmp_path / "pred.csv")]) == EXIT_PARSE


class TestExitCodes:
    def test_parse_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("station,date,hour,visibility_km,wind_speed_mps,altitude_m\n"
                       "A,not-a-date,8,1.0,1.0,1.0\n")
        assert main(["train", "--data", str(bad), "--out-dir", str(tmp_path)]) == EXIT_PARSE

    def test_validation_error_exit_code(self, tmp_path):
        cfg = write_cfg(tmp_path, "no_such_key = 1\n")
        assert main(["attenuation-sweep", "--config", cfg,
                     "--out-dir", str(tmp_path)]) == EXIT_VALIDATION

    def test_usage_error_exit_code(self):
        with pytest.raises(SystemExit) as err:
            main(["no-such-command"])
        assert err.value.code == 2
