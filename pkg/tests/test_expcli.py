import argparse
import json
import math
from concurrent.futures import ThreadPoolExecutor

import pytest

from src.core.config import Settings
from src.core.errors import CapacityError, ConfigError, DimensionError
from src.expcli import (
    CSV_HEADER,
    emit_results,
    mapping_plan,
    point_config,
    read_results,
    resolve_block_count,
    run_abep_sweep,
    run_qr_experiment,
)
from src.expcli.cli import build_parser, main, parse_range, sweep_config_from_args
from src.models import NoiseMode, OutputFormat, ResultMetric, ResultRow, Scenario, SweepConfig
from src.modem import ModuleMatrix
from src.qrcodec import qr_decode


def abep_config(**overrides):
    base = dict(
        scenario="abep_snr",
        elements=9,
        n_tx=4,
        n_rx=9,
        modulations=[2, 4],
        gamma_db_range=[0.0, 20.0],
        trials=4,
        frames=10,
        seed=3,
    )
    base.update(overrides)
    return SweepConfig.model_validate(base)


def desk_qr(**overrides):
    """21 x 21 surface showing a version-1 symbol at one module per element."""
    base = dict(
        scenario="qr_snr",
        elements=441,
        n_tx=8,
        n_rx=441,
        modulations=[2],
        noise={"gamma_db": 40.0},
        gamma_db_range=[40.0],
        trials=2,
        qr={"version": 1, "ec_level": "H", "border": 0},
        payload="IRS-QR",
        seed=7,
    )
    base.update(overrides)
    return SweepConfig.model_validate(base)


def metric(rows, name, x=None):
    return [r.value for r in rows if r.metric.value == name and (x is None or r.x == x)]


class TestPointConfig:
    def test_sets_swept_variable(self):
        cfg = abep_config()
        assert point_config(cfg, 12.5).noise.gamma_db == 12.5
        assert point_config(cfg.model_copy(update={"scenario": Scenario.ABEP_NTX}), 32).n_tx == 32
        assert point_config(cfg.model_copy(update={"scenario": Scenario.ABEP_KAPPA}), 10.0).rician.kappa == 10.0
        assert point_config(desk_qr(scenario="qr_obstruction"), 5).obstruction_side == 5

    def test_snr_sweep_needs_target_mode(self):
        cfg = abep_config(noise={"mode": "physical"})
        with pytest.raises(ConfigError):
            point_config(cfg, 10.0)

    def test_default_ranges(self):
        assert abep_config(scenario="abep_ntx").sweep_values() == [8, 16, 32, 64, 128]
        assert abep_config(scenario="abep_kappa").sweep_values() == [0.0, 0.1, 1.0, 10.0]

    def test_ranges_must_increase(self):
        with pytest.raises(ValueError):
            abep_config(gamma_db_range=[10.0, 5.0])


class TestBlockCount:
    def test_auto_enabled_when_receivers_are_short(self):
        assert resolve_block_count(abep_config(elements=16, n_rx=4)) == 4
        assert resolve_block_count(abep_config(elements=16, n_rx=16)) is None

    def test_untileable(self):
        with pytest.raises(ConfigError):
            resolve_block_count(abep_config(elements=16, n_rx=16, block_count=3))

    def test_groups_exclude_blocks(self):
        with pytest.raises(ConfigError):
            resolve_block_count(abep_config(elements=16, n_rx=4, groups=2))


class TestAbepSweep:
    def test_rows_layout(self):
        rows = run_abep_sweep(abep_config())
        assert len(rows) == 2 * 2 * 3
        assert [r.metric for r in rows[:3]] == [ResultMetric.ABEP_THEORY, ResultMetric.ABEP_SIM, ResultMetric.STDERR]
        assert [(r.x, r.modulation) for r in rows[::3]] == [(0.0, 2), (0.0, 4), (20.0, 2), (20.0, 4)]
        bits = {2: 4 * 10 * 9, 4: 4 * 10 * 9 * 2}
        assert all(r.trials == bits[r.modulation] and r.seed == 3 for r in rows)

    def test_stderr_recomputable_from_row(self):
        rows = run_abep_sweep(abep_config(gamma_db_range=[0.0]))
        for m in (2, 4):
            sim = next(r for r in rows if r.modulation == m and r.metric == ResultMetric.ABEP_SIM)
            se = next(r for r in rows if r.modulation == m and r.metric == ResultMetric.STDERR)
            assert 0.0 < sim.value < 1.0
            assert se.trials == sim.trials
            assert se.value == pytest.approx(math.sqrt(sim.value * (1.0 - sim.value) / se.trials))

    def test_closed_form_falls_with_snr(self):
        rows = [r for r in run_abep_sweep(abep_config()) if r.modulation == 2]
        low, high = metric(rows, "abep_theory", 0.0)[0], metric(rows, "abep_theory", 20.0)[0]
        assert high < low

    def test_reproducible_for_any_worker_count(self):
        cfg = abep_config()
        with ThreadPoolExecutor(max_workers=1) as one, ThreadPoolExecutor(max_workers=4) as four:
            assert run_abep_sweep(cfg, one) == run_abep_sweep(cfg, four)

    def test_rejects_qr_scenario(self):
        with pytest.raises(ConfigError):
            run_abep_sweep(desk_qr())


class TestQrExperiment:
    def test_high_snr_is_recognized(self):
        res = run_qr_experiment(desk_qr())
        assert metric(res.rows, "recognition_prob") == [1.0]
        assert metric(res.rows, "recovery_prob")[0] <= metric(res.rows, "recognition_prob")[0]
        assert len(res.bitmaps) == 1 and res.bitmaps[0].recognizable

    def test_full_obstruction_is_not_recognized(self, tmp_path):
        cfg = desk_qr(scenario="qr_obstruction", gamma_db_range=None, obstruction_range=[0, 21], bitmap_dir=str(tmp_path))
        res = run_qr_experiment(cfg)
        assert metric(res.rows, "recognition_prob", 0.0) == [1.0]
        assert metric(res.rows, "recognition_prob", 21.0) == [0.0]
        assert metric(res.rows, "recovery_prob", 21.0) == [0.0]
        names = sorted(p.name for p in res.written)
        assert names == [
            "qr_obstruction_M2_x0_original.pbm",
            "qr_obstruction_M2_x0_recovered_recognizable.pbm",
            "qr_obstruction_M2_x21_original.pbm",
            "qr_obstruction_M2_x21_recovered_unrecognizable.pbm",
        ]
        original = ModuleMatrix.load(tmp_path / "qr_obstruction_M2_x0_original.pbm")
        assert qr_decode(original).payload == b"IRS-QR"

    def test_block_mode_with_few_receivers(self):
        cfg = desk_qr(elements=42 * 42, noise={"gamma_db": 50.0}, gamma_db_range=[50.0], trials=1)
        assert resolve_block_count(cfg) == 441
        res = run_qr_experiment(cfg)
        assert metric(res.rows, "recognition_prob") == [1.0]

    def test_frequency_groups(self):
        res = run_qr_experiment(desk_qr(groups=3, n_rx=147, trials=1))
        assert metric(res.rows, "recognition_prob") == [1.0]

    def test_geometry_checked_before_running(self):
        with pytest.raises(DimensionError):
            run_qr_experiment(desk_qr(elements=440, n_rx=440))
        with pytest.raises(CapacityError):
            run_qr_experiment(desk_qr(payload="too long for v1-H"))

    @pytest.mark.slow
    def test_noiseless_limit_is_always_recognized(self):
        res = run_qr_experiment(desk_qr(trials=100))
        assert metric(res.rows, "recognition_prob") == [1.0]

    @pytest.mark.slow
    def test_recognition_falls_with_obstruction(self):
        trials = 1000
        cfg = desk_qr(
            scenario="qr_obstruction",
            noise={"gamma_db": 15.0},
            gamma_db_range=None,
            obstruction_range=[0, 3, 6, 9],
            trials=trials,
        )
        res = run_qr_experiment(cfg)
        recognition = metric(res.rows, "recognition_prob")
        recovery = metric(res.rows, "recovery_prob")
        assert len(recognition) == 4
        for a, b in zip(recognition, recognition[1:]):
            assert b <= a + 3 * math.sqrt((a * (1 - a) + b * (1 - b)) / trials)
        assert recognition[-1] < recognition[0]
        assert all(rv <= rg for rv, rg in zip(recovery, recognition))

    def test_mapping_plan_uses_grid_side(self):
        plan = mapping_plan(desk_qr(qr={"version": 1, "border": 2}), 2)
        assert (plan.module_side, plan.bits_per_symbol, plan.frame_count) == (23, 1, 2)
        assert mapping_plan(desk_qr(), 16).frame_count == 1


class TestBudgetDefaults:
    def test_qr_scenarios_run_ten_thousand_trials(self):
        assert SweepConfig(scenario="qr_obstruction").trials == 10_000
        assert SweepConfig(scenario="qr_snr", trials=7).trials == 7

    def test_abep_points_carry_a_million_bits(self):
        cfg = SweepConfig()
        assert (cfg.trials, cfg.frames, cfg.slots_per_frame) == (100, 157, 64)
        assert cfg.trials * cfg.frames * cfg.slots_per_frame >= 10**6

    def test_frames_follow_slots_and_lowest_order(self):
        cfg = SweepConfig(elements=16, n_rx=4, trials=10, modulations=[16, 4])
        assert cfg.slots_per_frame == 4
        assert cfg.frames == 12_500
        assert SweepConfig(elements=16, block_count=8, trials=1000, modulations=[2]).frames == 125

    def test_explicit_frames_are_kept(self):
        assert SweepConfig(frames=5).frames == 5
        assert SweepConfig(scenario="qr_snr").frames == 1


class TestResults:
    ROWS = [
        ResultRow(scenario="abep_snr", x=0.0, modulation=2, metric="abep_theory", value=0.25, trials=4, seed=1),
        ResultRow(scenario="abep_snr", x=0.0, modulation=2, metric="stderr", value=1e-3, trials=4, seed=1),
    ]

    def test_csv(self, tmp_path):
        path = emit_results(self.ROWS, tmp_path / "out" / "rows.csv")
        raw = path.read_bytes()
        assert raw.startswith(",".join(CSV_HEADER).encode() + b"\r\n")
        assert b"abep_snr,0.0,2,abep_theory,0.25,4,1\r\n" in raw
        assert read_results(path) == self.ROWS

    def test_jsonl(self, tmp_path):
        path = emit_results(self.ROWS, tmp_path / "rows.jsonl")
        first = json.loads(path.read_text().splitlines()[0])
        assert first == {"scenario": "abep_snr", "x": 0.0, "M": 2, "metric": "abep_theory", "value": 0.25, "trials": 4, "seed": 1}
        assert read_results(path) == self.ROWS

    def test_explicit_format_wins(self, tmp_path):
        path = emit_results(self.ROWS, tmp_path / "rows.txt", OutputFormat.JSONL)
        assert read_results(path, OutputFormat.JSONL) == self.ROWS

    def test_empty_rows_write_nothing(self, tmp_path):
        with pytest.raises(ValueError):
            emit_results([], tmp_path / "rows.csv")
        assert not (tmp_path / "rows.csv").exists()

    def test_probability_range_enforced(self):
        with pytest.raises(ValueError):
            ResultRow(scenario="qr_snr", x=1.0, modulation=2, metric="recovery_prob", value=1.5, trials=1, seed=0)


class TestParseRange:
    def test_forms(self):
        assert parse_range("0:10:5") == [0.0, 5.0, 10.0]
        assert parse_range("0:2") == [0.0, 1.0, 2.0]
        assert parse_range("0.1,1,10") == [0.1, 1.0, 10.0]
        assert parse_range("15") == [15.0]
        assert parse_range("8,16", int) == [8, 16]

    def test_rejects_backwards(self):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_range("5:1")
        with pytest.raises(argparse.ArgumentTypeError):
            parse_range("0:1:0")


class TestCli:
    def parse(self, *argv):
        return sweep_config_from_args(build_parser().parse_args(list(argv)), Settings())

    def test_qr_presets(self):
        bpsk = self.parse("qr")
        assert (bpsk.elements, bpsk.n_tx, bpsk.n_rx) == (1444, 38, 38)
        assert (bpsk.qr.version, bpsk.qr.border, bpsk.obstruction_side) == (5, 1, 10)
        assert bpsk.scenario == Scenario.QR_OBSTRUCTION
        psk16 = self.parse("qr", "--mod", "16")
        assert (psk16.elements, psk16.qr.version, psk16.noise.gamma_db, psk16.payload) == (361, 1, 30.0, "IRS-QR")
        assert bpsk.trials == psk16.trials == 10_000
        assert self.parse("qr", "--trials", "25").trials == 25

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "sweep.json"
        path.write_text(json.dumps({"scenario": "abep_kappa", "elements": 16, "trials": 9, "kappa_range": [0, 1]}))
        cfg = self.parse("abep", "--config", str(path), "--trials", "3", "--snr-db", "12", "--noise-mode", "target_snr")
        assert cfg.scenario == Scenario.ABEP_KAPPA
        assert (cfg.elements, cfg.trials, cfg.kappa_range, cfg.noise.gamma_db) == (16, 3, [0.0, 1.0], 12.0)
        assert cfg.noise.mode == NoiseMode.TARGET_SNR

    def test_swept_flag_becomes_range(self):
        cfg = self.parse("abep", "--scenario", "abep_ntx", "--ntx", "8:32:8")
        assert cfg.n_tx_range == [8, 16, 24, 32]

    def test_unswept_flag_must_be_single(self):
        with pytest.raises(ConfigError):
            self.parse("abep", "--scenario", "abep_snr", "--ntx", "8,16")

    def test_abep_to_csv(self, tmp_path):
        out = tmp_path / "abep.csv"
        code = main(
            ["--log-level", "WARNING", "abep", "--elements", "9", "--ntx", "4", "--nrx", "9", "--mod", "2",
             "--snr-db", "0,10", "--trials", "2", "--frames", "4", "--threads", "2", "--out", str(out)]
        )
        assert code == 0
        rows = read_results(out)
        assert len(rows) == 6
        assert {r.x for r in rows} == {0.0, 10.0}

    def test_abep_to_stdout(self, capsys):
        code = main(["--log-level", "WARNING", "abep", "--elements", "4", "--ntx", "2", "--nrx", "4",
                     "--mod", "4", "--snr-db", "10", "--trials", "1", "--frames", "2"])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 3
        assert lines[1].startswith("abep_snr,10.0,4,abep_sim,")

    def test_config_errors_exit_2(self):
        assert main(["--log-level", "ERROR", "abep", "--scenario", "qr_snr"]) == 2
        assert main(["--log-level", "ERROR", "abep", "--trials", "0"]) == 2

    def test_argument_errors_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["abep", "--mod", "3"])
        assert exc.value.code == 2

    def test_encode_then_decode(self, tmp_path, capsys):
        path = tmp_path / "symbol.pbm"
        assert main(["--log-level", "WARNING", "encode", "--payload", "hello", "--version", "2",
                     "--ec", "Q", "--border", "1", "--out", str(path)]) == 0
        grid = ModuleMatrix.load(path)
        assert grid.n == 26
        assert qr_decode(grid, border=1).payload == b"hello"
        assert main(["--log-level", "WARNING", "decode", str(path), "--border", "1"]) == 0
        assert capsys.readouterr().out.strip() == "hello"

    def test_decode_failure_exits_1(self, tmp_path):
        path = ModuleMatrix.zeros(21).save(tmp_path / "blank.pbm")
        assert main(["--log-level", "ERROR", "decode", str(path)]) == 1

    def test_missing_input_exits_1(self, tmp_path):
        assert main(["--log-level", "ERROR", "decode", str(tmp_path / "absent.pbm")]) == 1

    @pytest.mark.parametrize("threads", ["1", "3"])
    def test_outputs_identical_across_thread_counts(self, tmp_path, threads):
        def run(root, n):
            abep = root / "abep.csv"
            qr = root / "qr.csv"
            assert main(["--log-level", "WARNING", "abep", "--elements", "9", "--ntx", "4", "--nrx", "9",
                         "--mod", "2", "--mod", "4", "--snr-db", "0,10", "--trials", "3", "--frames", "4", "--seed", "5",
                         "--threads", n, "--out", str(abep)]) == 0
            assert main(["--log-level", "WARNING", "qr", "--mod", "16", "--obstruction", "0,6", "--snr-db", "12",
                         "--trials", "3", "--seed", "5", "--threads", n, "--bitmap-dir", str(root / "bitmaps"),
                         "--out", str(qr)]) == 0
            bitmaps = {p.name: p.read_bytes() for p in sorted((root / "bitmaps").glob("*.pbm"))}
            return abep.read_bytes(), qr.read_bytes(), bitmaps

        serial = run(tmp_path / "serial", "2")
        pooled = run(tmp_path / "pooled", threads)
        assert serial == pooled
        assert serial[2]
