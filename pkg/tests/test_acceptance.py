"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Criterion 6 needs a real Ausgrid CSV and is skipped unless the
AUSGRID_CSV environment variable points at one (AUSGRID_CUSTOMER optionally
narrows it to one customer).
"""

import os
import time

import numpy as np
import pytest
from oracles import (
    fd_ae_gradients,
    fd_decision_jacobian,
    fd_linear_gradient,
    freeze_linear_models,
    sample_interior_profile,
)

from gridcodec import (
    INFINITY,
    AutoencoderCodec,
    LinearCodec,
    ProfileDataset,
    TaskSpec,
    TrainConfig,
    ae_init,
    ae_loss_gradients,
    ae_train,
    empirical_loss,
    fit_utility_linear,
    klt_fit,
    linearize_at,
    loss_gradient,
    oracle_solve,
    solve_waterfill,
    utility,
)
from gridcodec.cli import main as cli_main
from gridcodec.dataio import load_ausgrid, synth_generate
from gridcodec.evaluate import eval_codec, sweep_bits


def report(line: str) -> None:
    print(f"\n[acceptance] {line}", flush=True)


def test_criterion_1_waterfilling_matches_oracle():
    rng = np.random.default_rng(1001)
    exponents = [2, 3, 4, INFINITY]
    started = time.perf_counter()
    worst_utility_gap = 0.0
    worst_allocation_gap = 0.0
    for _ in range(1000):
        dim = int(rng.integers(2, 7))
        ell = rng.uniform(-5.0, 5.0, dim)
        task = TaskSpec(exponent=exponents[int(rng.integers(0, 4))],
                        budget=float(rng.uniform(0.1, 20.0)), dim=dim)
        fast = solve_waterfill(ell, task)
        slow = oracle_solve(ell, task)
        worst_utility_gap = max(worst_utility_gap,
                                abs(utility(fast.x, ell, task.exponent)
                                    - utility(slow.x, ell, task.exponent)))
        worst_allocation_gap = max(worst_allocation_gap, float(np.max(np.abs(fast.x - slow.x))))
    elapsed = time.perf_counter() - started
    assert worst_utility_gap <= 1e-7
    assert worst_allocation_gap <= 1e-6
    assert elapsed < 5.0
    report(f"criterion 1 PASS: 1000 instances, utility gap {worst_utility_gap:.2e}, "
           f"allocation gap {worst_allocation_gap:.2e}, {elapsed:.2f}s")


def test_criterion_2_jacobian_matches_finite_differences():
    rng = np.random.default_rng(1002)
    worst_entry = 0.0
    worst_column_sum = 0.0
    worst_budget = 0.0
    for _ in range(200):
        dim = int(rng.integers(2, 7))
        ell, task = sample_interior_profile(rng, dim, 2)
        lin = linearize_at(ell, task)
        fd = fd_decision_jacobian(ell, task, step=1e-5)
        worst_entry = max(worst_entry, float(np.max(np.abs(lin.jacobian - fd))))
        worst_column_sum = max(worst_column_sum, float(np.max(np.abs(lin.jacobian.sum(axis=0)))))
        worst_budget = max(worst_budget, abs(float(np.sum(lin.offset)) - task.budget))
    assert worst_entry <= 1e-4
    assert worst_column_sum <= 1e-12
    assert worst_budget <= 1e-12
    report(f"criterion 2 PASS: 200 interior points, max Jacobian error {worst_entry:.2e}, "
           f"column sums {worst_column_sum:.1e}, offset budget error {worst_budget:.1e}")


def test_criterion_3_gradients_match_frozen_model_differences():
    rng = np.random.default_rng(1003)
    worst_linear = 0.0
    for exponent in (2, 20, INFINITY):
        dataset = ProfileDataset(rng.uniform(-2.0, 2.0, (8, 4)))
        task = TaskSpec(exponent=exponent, budget=3.0, dim=4)
        matrix = rng.uniform(-0.5, 0.5, (2, 4))
        analytic = loss_gradient(LinearCodec(matrix), dataset, task)
        fd = fd_linear_gradient(matrix, dataset, task,
                                freeze_linear_models(matrix, dataset, task))
        worst_linear = max(worst_linear, float(np.linalg.norm(analytic - fd)
                                               / np.linalg.norm(fd)))
    assert worst_linear <= 1e-5

    worst_ae = 0.0
    for exponent in (2, 20, INFINITY):
        ell = rng.uniform(-2.0, 2.0, 4)
        task = TaskSpec(exponent=exponent, budget=3.0, dim=4)
        base = ae_init(4, 2, seed=int(rng.integers(1 << 16)), init_scale=0.4)
        enc = base.encoder_weights.copy()
        dec = base.decoder_weights.copy()
        enc[:, -1] = rng.uniform(-0.3, 0.3, 2)
        dec[:, -1] = rng.uniform(-0.3, 0.3, 4)
        codec = AutoencoderCodec(enc, dec)
        _, grad_enc, grad_dec = ae_loss_gradients(codec, ell, task)
        fd_enc, fd_dec = fd_ae_gradients(codec, ell, task)
        scale = max(np.linalg.norm(fd_enc), np.linalg.norm(fd_dec))
        worst_ae = max(worst_ae,
                       float(np.linalg.norm(grad_enc - fd_enc) / scale),
                       float(np.linalg.norm(grad_dec - fd_dec) / scale))
    assert worst_ae <= 1e-4
    report(f"criterion 3 PASS: linear gradient rel err {worst_linear:.2e} (<= 1e-5), "
           f"autoencoder rel err {worst_ae:.2e} (<= 1e-4), p in {{2, 20, inf}}")


def test_criterion_4_trained_codecs_beat_klt():
    started = time.perf_counter()
    seeds = range(10)
    summary = {}
    for exponent in (20, INFINITY):
        linear_ties = 0
        linear_wins = 0
        ae_wins = 0
        for seed in seeds:
            dataset = synth_generate(seed, 48, 8)
            task = TaskSpec(exponent=exponent, budget=5.0, dim=8)
            klt_loss = empirical_loss(klt_fit(dataset, 2), dataset, task)
            fitted, _ = fit_utility_linear(dataset, task, 2,
                                           max_iterations=200, learning_rate=0.05)
            fitted_loss = empirical_loss(fitted, dataset, task)
            linear_ties += fitted_loss <= klt_loss
            linear_wins += fitted_loss < klt_loss
            config = TrainConfig(epochs=500, learning_rate=0.5, seed=seed)
            _, ae_report = ae_train(dataset, task, config, width=2)
            ae_wins += min(ae_report.loss_trace) < klt_loss
        assert linear_ties == 10, f"p={exponent}: linear worse than KLT on a seed"
        assert linear_wins >= 9, f"p={exponent}: linear strictly better only {linear_wins}/10"
        assert ae_wins >= 8, f"p={exponent}: autoencoder better only {ae_wins}/10"
        summary[exponent] = (linear_wins, ae_wins)
    elapsed = time.perf_counter() - started
    assert elapsed < 120.0
    report("criterion 4 PASS: linear strictly beats KLT "
           f"{summary[20][0]}/10 (p=20) and {summary[INFINITY][0]}/10 (p=inf); "
           f"autoencoder beats KLT {summary[20][1]}/10 and {summary[INFINITY][1]}/10; "
           f"{elapsed:.0f}s")


def test_criterion_5_rate_sweep_flattens_at_high_rate():
    for exponent in (20, INFINITY):
        dataset = synth_generate(11, 64, 8)
        task = TaskSpec(exponent=exponent, budget=5.0, dim=8)
        codec = klt_fit(dataset, 2)
        entry = sweep_bits(codec, dataset, task, range(1, 9))
        losses = {bits: mse for bits, mse, _ in entry.curve}
        unquantized = entry.mse_loss
        assert abs(losses[8] - unquantized) <= 0.05 * unquantized
        assert losses[1] >= losses[8]
        assert abs(losses[6] - losses[8]) <= 0.10 * losses[8]
    report("criterion 5 PASS: 8-bit loss within 5% of unquantized, 1-bit >= 8-bit, "
           "6-to-8-bit change <= 10%, for p in {20, inf}")


AUSGRID_CSV = os.environ.get("AUSGRID_CSV", "")


@pytest.mark.skipif(not (AUSGRID_CSV and os.path.exists(AUSGRID_CSV)),
                    reason="set AUSGRID_CSV to a real Ausgrid half-hourly CSV to run")
def test_criterion_6_ausgrid_headline_improvement():
    customer = os.environ.get("AUSGRID_CUSTOMER") or None
    dataset = load_ausgrid(AUSGRID_CSV, customer_id=customer)
    task = TaskSpec(exponent=INFINITY, budget=50.0, dim=48)
    klt = klt_fit(dataset, 4)
    klt_entry = eval_codec(klt, dataset, task, name="klt")
    fitted, _ = fit_utility_linear(dataset, task, 4, max_iterations=200, learning_rate=0.05)
    fitted_entry = eval_codec(fitted, dataset, task, name="linear")
    assert fitted_entry.relative_percent < klt_entry.relative_percent / 2.0
    report(f"criterion 6 PASS: Ausgrid relative loss {klt_entry.relative_percent:.1f}% (KLT) "
           f"-> {fitted_entry.relative_percent:.1f}% (optimized linear)")


def test_criterion_7_cli_reports_are_deterministic(tmp_path):
    outputs = []
    for tag in ("first", "second"):
        root = tmp_path / tag
        root.mkdir()
        data = root / "data.csv"
        assert cli_main(["synth", "--seed", "4", "--t", "32", "--p", "8",
                         "--out", str(data)]) == 0
        klt = root / "klt.json"
        ae = root / "ae.json"
        assert cli_main(["train", "--codec", "klt", "--dataset", str(data),
                         "--n", "2", "--p", "inf", "--e", "5", "--out", str(klt)]) == 0
        assert cli_main(["train", "--codec", "ae", "--dataset", str(data),
                         "--n", "2", "--p", "inf", "--e", "5", "--iters", "20",
                         "--seed", "4", "--out", str(ae)]) == 0
        eval_out = root / "eval.json"
        sweep_out = root / "sweep.json"
        assert cli_main(["eval", "--codec", f"{klt},{ae}", "--dataset", str(data),
                         "--p", "inf", "--e", "5", "--bits", "4",
                         "--out", str(eval_out)]) == 0
        assert cli_main(["sweep", "--codec", str(klt), "--dataset", str(data),
                         "--p", "inf", "--e", "5", "--bits", "1,2,3,4",
                         "--out", str(sweep_out)]) == 0
        outputs.append((data.read_bytes(), klt.read_bytes(), ae.read_bytes(),
                        eval_out.read_bytes(), sweep_out.read_bytes()))
    assert outputs[0] == outputs[1]
    report("criterion 7 PASS: synth/train/eval/sweep outputs byte-identical across runs")
