"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line."""

import contextlib
import io
import json
import time

import numpy as np
import pytest

from mubwitness import catalog6, cli, mub, pdcert
from mubwitness import witness as W
from mubwitness.haar import SamplerConfig

import conftest
from conftest import random_complex, random_unitaries


@contextlib.contextmanager
def criterion(number, title):
    try:
        yield
    except BaseException:
        conftest.ACCEPTANCE_LINES.append(f"FAIL  {number}. {title}")
        raise
    conftest.ACCEPTANCE_LINES.append(f"PASS  {number}. {title}")


def cli_json(*argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(list(argv))
    return code, buf.getvalue()


def test_1_haar_integral_reproduction():
    with criterion(1, "Haar integral of h0 within 3 stderr of 2d/(d+1), d=2..6, <30 s each"):
        for d in range(2, 7):
            t0 = time.perf_counter()
            code, out = cli_json("integrate", "--witness", "h0", "--dim", str(d), "--samples", "100000")
            elapsed = time.perf_counter() - t0
            res = json.loads(out)["result"]
            assert code == 0
            assert abs(res["mean"] - 2 * d / (d + 1)) <= 3 * res["stderr"], (d, res)
            assert res["stderr"] <= 0.005 * res["mean"]
            assert elapsed < 30, (d, elapsed)


def test_2_bound_reproduction():
    with criterion(2, "bound --witness h returns exactly d+1, d=2..12"):
        for d in range(2, 13):
            code, out = cli_json("bound", "--witness", "h", "--dim", str(d))
            assert code == 0
            assert json.loads(out)["result"]["bound"] == d + 1
            assert W.delsarte_bound(W.witness_h(d)) == d + 1


def test_3_positive_definiteness_evidence():
    with criterion(3, "100 Gram matrices of h (d=6, m=8) PSD; projector oracle matches within 1e-9"):
        scan = pdcert.pd_scan(W.witness_h(6), 8, 100, SamplerConfig(6, seed=2024))
        assert len(scan.lambda_mins) == 100
        assert scan.worst >= -1e-8
        for t in range(20):
            d, m = 2 + t % 5, 4 + t % 9
            us = random_unitaries(d, m, seed=1000 + t)
            direct = pdcert.gram(W.witness_h0(d), us)
            assert np.max(np.abs(direct - pdcert.gram_h0_via_projectors(us))) <= 1e-9


def test_4_shifted_gram_check():
    with criterion(4, "lambda_min(G - J) >= -1e-8 for h0, alpha0=1, d=6 over 100 seeds; quadratic-form inequality"):
        w = W.witness_h0(6)
        for seed in range(100):
            rep = pdcert.shifted_check(w, 1.0, random_unitaries(6, 8, seed=seed), seed=seed)
            assert rep.lambda_min_shifted >= -1e-8, seed
        rng = np.random.default_rng(4)
        alpha = 12 / 7
        for seed in range(20):
            g = pdcert.gram(w, random_unitaries(6, 8, seed=500 + seed))
            for _ in range(10):
                c = rng.standard_normal(8) + 1j * rng.standard_normal(8)
                norm2 = np.vdot(c, c).real
                assert pdcert.quadratic_form(g, c) >= alpha * abs(c.sum()) ** 2 - 1e-6 * norm2


def test_5_complete_mub_construction():
    with criterion(5, "complete MUBs for d in {2,3,5,7,9,25}, deviation <= 1e-10, tight audit, <10 s"):
        t0 = time.perf_counter()
        for d in (2, 3, 5, 7, 9, 25):
            system = mub.construct(d)
            assert len(system) == d + 1
            res = mub.verify_mub(system)
            assert res.ok and res.worst_deviation <= 1e-10, (d, res)
            rec = W.delsarte_audit(system, W.witness_h(d))
            assert abs(rec.S - rec.upper) <= 1e-6 and abs(rec.S - rec.lower) <= 1e-6, (d, rec)
        assert time.perf_counter() - t0 < 10


def test_6_dimension_six_conjecture_lab():
    with criterion(6, "m1, m2, all 720 inner sums vanish on fourier(6); catalog scan exits 0 or 4 with findings reported"):
        f = catalog6.fourier(6)
        assert abs(W.m1(f)) <= 1e-10 and abs(W.m2(f)) <= 1e-10
        assert np.max(np.abs(W.all_inner_sums(f))) <= 1e-10

        code, out = cli_json("conj6", "check", "--family", "F6ab", "--grid", "11")
        res = json.loads(out)["result"]
        assert res["n_targets"] == 121
        assert code == (cli.EXIT_OK if res["all_vanish"] else cli.EXIT_REFUTATION)

        code, out = cli_json("conj6", "check", "--family", "all", "--grid", "11")
        res = json.loads(out)["result"]
        assert code in (cli.EXIT_OK, cli.EXIT_REFUTATION)
        assert (code == cli.EXIT_REFUTATION) == bool(res["non_vanishing"])
        if res["non_vanishing"]:
            assert res["finding"].startswith("refutation finding")
            conftest.ACCEPTANCE_LINES.append(
                "      finding: m1/m2 do not vanish on " + ", ".join(res["non_vanishing"]))


def test_7_analytic_identities():
    with criterion(7, "signed permutation sum vanishes; subset m1 equals brute force; m1 real"):
        rng = np.random.default_rng(7)
        for _ in range(100):
            z = random_complex(rng, 6)
            assert abs(W.signed_permutation_sum(z)) <= 1e-10 * max(1.0, np.sum(np.abs(W.all_inner_sums(z))))
        for z in random_unitaries(6, 20, seed=77):
            fast, slow = W.m1(z), W.m1_bruteforce(z)
            assert abs(fast - slow) <= 1e-10 * abs(slow)
            total = np.sum(W.all_inner_sums(z))
            assert abs(total.imag) <= 1e-10 * abs(total)


EPS_ARGV = ("eps-scan", "--kind", "sum_sq", "--grid", "0:0.1:10", "--m", "8", "--trials", "200", "--seed", "42")


@pytest.mark.slow
def test_8_eps_scan_harness():
    with criterion(8, "eps-scan bit-identical across reruns; eps=0 never refuted; bounds labelled conditional"):
        code1, first = cli_json(*EPS_ARGV, "--mean-samples", "5000")
        code2, second = cli_json(*EPS_ARGV, "--mean-samples", "5000")
        assert code1 == code2 == 0
        assert first == second
        res = json.loads(first)["result"]
        assert res["eps_grid"][0] == 0.0 and len(res["eps_grid"]) == 10
        assert res["trial_curve"][0] >= -1e-8 and res["lambda_min_curve"][0] >= -1e-8
        for b in res["conditional_bounds"]:
            assert b["note"] == cli.CONDITIONAL_NOTE
