import math

import numpy as np
import pytest

from gridcodec import (
    LinearCodec,
    ProfileDataset,
    QuantMode,
    TaskSpec,
    ae_init,
    calibrate,
    empirical_loss,
    klt_fit,
)
from gridcodec.dataio import synth_generate
from gridcodec.evaluate import (
    build_report,
    codec_coefficients,
    default_quant_mode,
    eval_codec,
    sweep_bits,
    validate_report,
    write_report_csv,
    write_report_json,
)

SINGLE_PROFILE = np.array([[-3.0, -1.0, 2.0]])
ZERO_CODEC_MSE = (math.sqrt(6) - math.sqrt(114) / 3) ** 2
ZERO_CODEC_RELATIVE = 100.0 * (math.sqrt(114) / 3 - math.sqrt(6)) / math.sqrt(6)


def quantizer_for(codec, dataset, bits):
    spec = calibrate(codec_coefficients(codec, dataset), default_quant_mode(codec))
    return spec, bits


class TestEvalCodec:
    def test_identity_codec_has_zero_loss(self):
        dataset = synth_generate(0, 10, 6)
        task = TaskSpec(exponent=2, budget=4.0, dim=6)
        entry = eval_codec(klt_fit(dataset, 6), dataset, task, name="identity")
        assert entry.mse_loss <= 1e-12
        assert entry.relative_percent <= 1e-5
        assert entry.relative_percent_mean <= 1e-5

    def test_zero_codec_hand_values(self):
        dataset = ProfileDataset(SINGLE_PROFILE)
        task = TaskSpec(exponent=2, budget=2.0, dim=3)
        entry = eval_codec(LinearCodec(np.zeros((1, 3))), dataset, task, name="zero")
        assert entry.mse_loss == pytest.approx(ZERO_CODEC_MSE, abs=1e-12)
        assert entry.relative_percent == pytest.approx(ZERO_CODEC_RELATIVE, abs=1e-9)
        assert entry.relative_percent == pytest.approx(45.30, abs=0.01)
        assert entry.mean_true_utility == pytest.approx(-math.sqrt(6), abs=1e-12)

    def test_agrees_exactly_with_empirical_loss(self):
        dataset = synth_generate(1, 16, 8)
        task = TaskSpec(exponent=20, budget=5.0, dim=8)
        codec = klt_fit(dataset, 3)
        entry = eval_codec(codec, dataset, task)
        assert abs(entry.mse_loss - empirical_loss(codec, dataset, task)) <= 1e-12

    def test_fine_quantizer_converges_to_unquantized(self):
        dataset = synth_generate(2, 16, 8)
        task = TaskSpec(exponent=2, budget=5.0, dim=8)
        codec = klt_fit(dataset, 3)
        base = eval_codec(codec, dataset, task)
        fine = eval_codec(codec, dataset, task, quantizer=quantizer_for(codec, dataset, 24))
        assert abs(fine.mse_loss - base.mse_loss) < 1e-6
        assert abs(fine.relative_percent - base.relative_percent) < 1e-6

    def test_quantizer_metadata_lands_in_entry(self):
        dataset = synth_generate(3, 8, 6)
        task = TaskSpec(exponent=2, budget=4.0, dim=6)
        codec = klt_fit(dataset, 2)
        entry = eval_codec(codec, dataset, task, quantizer=quantizer_for(codec, dataset, 4))
        assert entry.quantizer["bits"] == 4
        assert entry.quantizer["mode"] == "signed"
        assert len(entry.quantizer["m"]) == 2

    def test_autoencoder_uses_unit_mode(self):
        codec = ae_init(6, 2, seed=0, init_scale=0.3)
        assert default_quant_mode(codec) is QuantMode.UNIT
        dataset = synth_generate(4, 8, 6)
        task = TaskSpec(exponent=2, budget=4.0, dim=6)
        entry = eval_codec(codec, dataset, task, quantizer=quantizer_for(codec, dataset, 3))
        assert entry.quantizer["mode"] == "unit"
        assert "m" not in entry.quantizer


class TestSweepBits:
    def test_saturation_at_high_rate(self):
        dataset = synth_generate(5, 16, 8)
        task = TaskSpec(exponent=2, budget=5.0, dim=8)
        codec = klt_fit(dataset, 2)
        entry = sweep_bits(codec, dataset, task, [24])
        bits, mse, rel = entry.curve[0]
        assert bits == 24
        assert abs(mse - entry.mse_loss) < 1e-6
        assert abs(rel - entry.relative_percent) < 1e-6

    def test_loss_roughly_non_increasing_in_bits(self):
        dataset = synth_generate(6, 24, 8)
        task = TaskSpec(exponent=20, budget=5.0, dim=8)
        codec = klt_fit(dataset, 2)
        entry = sweep_bits(codec, dataset, task, [1, 2, 4, 6, 8])
        losses = [point[1] for point in entry.curve]
        for coarse, fine in zip(losses, losses[1:]):
            assert fine <= coarse * 1.02

    def test_zero_codec_gives_flat_curve(self):
        dataset = ProfileDataset(SINGLE_PROFILE)
        task = TaskSpec(exponent=2, budget=2.0, dim=3)
        entry = sweep_bits(LinearCodec(np.zeros((1, 3))), dataset, task, [1, 4, 8])
        losses = {point[1] for point in entry.curve}
        assert len(losses) == 1
        assert losses.pop() == pytest.approx(ZERO_CODEC_MSE, abs=1e-12)


class TestReports:
    def build(self):
        dataset = synth_generate(7, 12, 6)
        task = TaskSpec(exponent=20, budget=4.0, dim=6)
        codec = klt_fit(dataset, 2)
        entries = [
            eval_codec(codec, dataset, task, name="klt"),
            sweep_bits(codec, dataset, task, [1, 2, 4], name="klt_sweep"),
        ]
        return build_report(task, entries)

    def test_report_validates_against_schema(self):
        validate_report(self.build())

    def test_max_norm_exponent_serializes_as_inf(self):
        task = TaskSpec(exponent=math.inf, budget=4.0, dim=6)
        dataset = synth_generate(8, 8, 6)
        entry = eval_codec(klt_fit(dataset, 2), dataset, task, name="klt")
        report = build_report(task, [entry])
        assert report["task"]["p"] == "inf"
        validate_report(report)

    def test_json_and_csv_outputs(self, tmp_path):
        report = self.build()
        json_path = tmp_path / "report.json"
        csv_path = tmp_path / "report.csv"
        write_report_json(report, json_path)
        write_report_csv(report, csv_path)
        text = json_path.read_text()
        assert text.endswith("\n")
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "codec,bits,mse_loss,relative_percent"
        # one bare row per codec plus one per curve point
        assert len(lines) == 1 + 2 + 3

    def test_relative_percent_zero_iff_perfect(self):
        dataset = synth_generate(9, 10, 6)
        task = TaskSpec(exponent=2, budget=4.0, dim=6)
        perfect = eval_codec(klt_fit(dataset, 6), dataset, task)
        lossy = eval_codec(klt_fit(dataset, 1), dataset, task)
        assert perfect.relative_percent == pytest.approx(0.0, abs=1e-5)
        assert lossy.relative_percent > 0.0
