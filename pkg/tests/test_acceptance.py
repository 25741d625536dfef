"""One check per acceptance criterion; results are listed in the terminal summary."""

import math

import numpy as np

from gdw.certify import certify, certify_estimate
from gdw.mub import build_mub, check_orthogonality, check_unbiasedness, encode_optimal, measurement_overlap
from gdw.oracles import classical_rac_exhaustive, tradeoff_grid_check
from gdw.simulate import SimConfig, expected_click_rates, fom_closed_form, fom_first_order, simulate
from gdw.solver import bound_table, objective, solve_bound
from gdw.structures import parse_structure
from gdw.tradeoff import mq_array, optimal_asp_single, tradeoff_q, tradeoff_q_trig
from reference_values import QUANTUM_1024


def _binomial_ok(hits, trials, p, n_sigma=3.0):
    return abs(hits / trials - p) <= n_sigma * math.sqrt(p * (1 - p) / trials)


def test_01_closed_forms(criterion):
    q, c = optimal_asp_single(1024, "Q"), optimal_asp_single(1024, "C")
    ok = q == 0.515625 and round(c, 6) == 0.500488
    criterion(1, "single-system optima Q1024, C1024", ok, f"Q={q!r} C={c!r}")


def test_02_quantum_table(criterion, quantum_table_1024):
    got = {r.structure.render(): r.asp for r in quantum_table_1024}
    worst = max(abs(round(got.get(k, math.nan), 6) - v) for k, v in QUANTUM_1024.items())
    ok = len(quantum_table_1024) == 42 and set(got) == set(QUANTUM_1024) and worst <= 1e-6 + 1e-12
    criterion(2, "42-row quantum table for d=1024 within 1e-6", ok, f"rows={len(got)} worst={worst:.1e}")


def test_03_mixed_rows(criterion, solver_config):
    rows = {
        r.structure.render(): r.asp
        for r in bound_table(1024, config=solver_config, structures=[parse_structure(s) for s in ("Q512*C2", "Q512*Q2", "Q256*Q4")])
    }
    q2c512 = solve_bound(parse_structure("Q2*C512"), solver_config).asp
    ok = (
        abs(round(rows["Q512*C2"], 6) - 0.500973) <= 1e-6 + 1e-12
        and abs(round(q2c512, 6) - 0.500489) <= 1e-6 + 1e-12
        and rows["Q512*C2"] > rows["Q256*Q4"]
        and abs(round(rows["Q256*Q4"], 6) - 0.500654) <= 1e-6 + 1e-12
    )
    criterion(3, "mixed rows and Q512*C2 > Q256*Q4", ok, f"Q512C2={rows['Q512*C2']:.7f} Q2C512={q2c512:.7f}")


def test_04_d39(criterion, solver_config):
    s = parse_structure("Q13*Q3")
    res = solve_bound(s, solver_config)
    z1, z2 = res.argmax
    mirror = (tradeoff_q(13, z1), tradeoff_q(3, z2))
    found = sorted([tuple(res.argmax), mirror])
    targets = [(0.1944, 0.4302), (0.9695, 0.9900)]
    close = all(max(abs(a - b) for a, b in zip(f, t)) <= 1e-3 for f, t in zip(found, targets))
    product = optimal_asp_single(13, "Q") * optimal_asp_single(3, "Q")
    ok = (
        abs(res.asp - 0.5217) <= 5e-4
        and close
        and abs(objective(s, mirror) - res.asp) <= 1e-12
        and res.asp > product
        and round(product, 4) == 0.5037
    )
    criterion(4, "d=39 bound, both maximizers, beats independent product", ok, f"asp={res.asp:.6f} argmax={found}")


def test_05_mub_exactness(criterion):
    ok = True
    for k in range(1, 6):
        m = build_mub(k)
        samples = None if k <= 3 else 100_000
        ok &= check_orthogonality(m, samples=samples, seed=k) and check_unbiasedness(m, samples=samples, seed=k)
        if k >= 4:
            ok &= check_unbiasedness(m)
    criterion(5, "exact orthogonality and unbiasedness for k=1..5", bool(ok))


def test_06_encoder(criterion):
    m = build_mub(5)
    rng = np.random.default_rng(11)
    worst_hit = worst_miss = 0.0
    wrong = (1 - 0.515625) / 1023
    for x1, x2 in rng.integers(1, 1025, (8, 2)):
        s = encode_optimal(m, int(x1), int(x2))
        worst_hit = max(worst_hit, abs(measurement_overlap(m, 1, x1, s) - 0.515625))
        for j in range(1, 1025):
            if j != x1:
                worst_miss = max(worst_miss, abs(measurement_overlap(m, 1, j, s) - wrong))
    ok = worst_hit <= 1e-12 and worst_miss <= 1e-12
    criterion(6, "k=5 encoder overlaps", ok, f"hit={worst_hit:.1e} miss={worst_miss:.1e}")


def test_07_tradeoff_properties(criterion):
    ok, details = True, []
    for d in (2, 4, 16, 1024):
        z = np.linspace(1 / d, 1, 2001)
        m = mq_array(d, z)
        forms = max(abs(tradeoff_q(d, v) - tradeoff_q_trig(d, v)) for v in z)
        invol = float(np.max(np.abs(mq_array(d, np.clip(m, 1 / d, 1)) - z)))
        ends = abs(tradeoff_q(d, 1 / d) - 1) <= 1e-12 and abs(tradeoff_q(d, 1) - 1 / d) <= 1e-12
        concave = bool(np.all(np.diff(m, 2) <= 1e-12))
        sweep = tradeoff_grid_check(d, 1000 if d == 1024 else 10_000)
        ok &= forms <= 1e-12 and invol <= 1e-10 and ends and concave and sweep.max_deviation <= 1e-10
        details.append(f"d={d}:{sweep.max_deviation:.0e}")
    criterion(7, "trade-off forms, involution, endpoints, concavity, achievability", bool(ok), " ".join(details))


def test_08_classical_oracle(criterion):
    d2, d3 = classical_rac_exhaustive(2), classical_rac_exhaustive(3)
    ok = d2 == 0.75 == optimal_asp_single(2, "C") and abs(d3 - 2 / 3) <= 1e-15
    criterion(8, "exhaustive classical RAC for d=2,3", ok, f"{d2!r} {d3!r}")


def test_09_simulator(criterion):
    cfg = SimConfig(k=1, mu=0.4, nu=0.13, rounds=10**7, seed=2024)
    t = simulate(cfg)
    q = optimal_asp_single(4, "Q")
    r1, r2 = expected_click_rates(q, 4, cfg.nu_mu)
    fom = fom_closed_form(q, 4, cfg.nu_mu)
    ok = (
        _binomial_ok(t.D1, t.X1, r1)
        and _binomial_ok(t.D2, t.X2, r2)
        and _binomial_ok(t.D1, t.D1 + t.D2, fom)
        and abs(fom - fom_first_order(q, 4, cfg.nu_mu)) <= 1e-4
    )
    criterion(9, "simulator agrees with closed forms at 1e7 rounds", ok, f"fom={t.fom():.5f} expected={fom:.5f}")


def test_10_certification(criterion, table_4, quantum_table_1024):
    t = simulate(SimConfig(k=1, rounds=4_000_000, seed=99))
    report = certify(t, 4, table_4, 3.0)
    reported = certify_estimate(0.515, 0.008, 1024, quantum_table_1024, 1.0, complete=False)
    top = reported.bounds[0]
    ok = (
        report.verdict_label() == "IrreducibleQuantum(4)"
        and reported.certified
        and top.structure.render() == "Q512*Q2"
        and abs(top.z_score - 1.75) <= 5e-3
    )
    criterion(10, "simulate-then-certify at d=4 and a 0.515 +/- 0.008 estimate at d=1024", ok, f"z={top.z_score:.3f}")


def test_11_gamut_distinct(criterion, table_4):
    values = {r.structure.render(): r.asp for r in table_4}
    cases = [values[s] for s in ("Q4", "Q2*Q2", "Q2*C2", "C4")]
    gap = min(abs(a - b) for i, a in enumerate(cases) for b in cases[i + 1 :])
    criterion(11, "four distinct d=4 bounds", gap >= 1e-6, f"min gap={gap:.4f}")
