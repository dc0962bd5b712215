from fractions import Fraction

import pytest

from fifolab import (
    CheckStatus,
    Policy,
    analyze,
    build_chain,
    build_instance,
    build_ledger,
    demo_instance,
    feasible,
    greedy_blocking,
    ratio_report,
    run,
    run_ropt,
    total_value,
    verify_ledger,
    verify_ropt,
)
from fifolab.analysis import (
    EVICTED_ALPHA_INTERVAL,
    EVICTED_ONE_CHAIN,
    PREEMPTED_INTERVAL,
    PREEMPTED_OPEN_CHAIN,
    REJECTED_ONE_CHAIN,
    SENT_BY_BOTH,
    format_ledger,
    format_report,
)

BETA_REF = Fraction(3284, 1000)


def by_ids(inst, *ids):
    index = {p.id: p for p in inst.arrivals}
    return {index[i] for i in ids}


def demo_setup(alpha=Fraction(2)):
    inst = demo_instance(alpha)
    on = run(Policy.on(alpha), inst)
    chosen = by_ids(inst, "1.2", "2", "2.1", "2.2", "5", "5.1", "5.2")
    return inst, on, chosen


class TestRunRopt:
    def test_demo_reference_runs_ahead_on_the_lost_alpha(self):
        inst, on, chosen = demo_setup()
        ropt = run_ropt(inst, chosen, on)
        times = {p.id: t for p, t in ropt.send_time.items()}
        # the policy spends step 1 on a 1-value packet; the reference
        # sends the alpha packet the policy will lose to eviction
        assert times["1.2"] == 1
        assert times == {"1.2": 1, "2": 2, "2.1": 3, "2.2": 4, "5.1": 5, "5.2": 6, "5": 7}
        assert ropt.last_step == 7

    def test_empty_chosen_set_never_sends(self):
        inst, on, _ = demo_setup()
        ropt = run_ropt(inst, set(), on)
        assert ropt.send_time == {}

    def test_mirrors_when_policy_matches_optimum(self):
        inst = build_instance(2, Fraction(2), [(1, 0, "alpha"), (1, 1, "alpha")])
        on = run(Policy.on(BETA_REF), inst)
        ropt = run_ropt(inst, set(inst.arrivals), on)
        from fifolab.simulate import sends_by_step

        assert dict(ropt.sent) == sends_by_step(on)

    def test_infeasible_chosen_set_rejected(self):
        inst = greedy_blocking(Fraction(10))
        on = run(Policy.on(BETA_REF), inst)
        with pytest.raises(ValueError):
            run_ropt(inst, set(inst.arrivals), on)


class TestVerifyRopt:
    def test_demo_all_pass(self):
        inst, on, chosen = demo_setup()
        report = verify_ropt(inst, chosen, on, run_ropt(inst, chosen, on))
        assert report.ok
        for name in ("ropt-capacity", "ropt-sends-all", "send-precedence", "chains-disjoint"):
            assert report.check(name).status == CheckStatus.PASS

    def test_empty_chosen_set_vacuous(self):
        inst, on, _ = demo_setup()
        report = verify_ropt(inst, set(), on, run_ropt(inst, set(), on))
        assert report.ok

    def test_backlog_diagnostic_reports_counts(self):
        inst, on, chosen = demo_setup()
        report = verify_ropt(inst, chosen, on, run_ropt(inst, chosen, on))
        check = report.check("backlog-bound")
        assert check.status == CheckStatus.PASS
        assert "max alpha backlog 1" in check.detail
        assert "bound 3/2" in check.detail


class TestChains:
    def test_single_step_chain_for_deferred_eviction(self):
        # four 1-value packets, capacity 2: the policy evicts the second
        # on the step-2 overflow; the reference sends it at step 3 while
        # the policy sends a packet outside the optimum
        inst = build_instance(
            2, Fraction(2), [(1, 0, "one"), (1, 1, "one"), (2, 0, "one"), (2, 1, "one")]
        )
        on = run(Policy.on(BETA_REF), inst)
        assert [p.id for p in on.sent] == ["1", "2", "2.1"]
        chosen = by_ids(inst, "1", "1.1", "2")
        ropt = run_ropt(inst, chosen, on)
        owner = next(p for p in inst.arrivals if p.id == "1.1")
        chain = build_chain(on, ropt, chosen, owner, t=4)
        assert chain.steps == (3,)

    def test_two_hop_chain(self):
        # the reference runs two steps ahead; its send of 3 at step 3
        # coincides with the policy sending 1.3, itself referenced at
        # step 2 where the policy sent a packet outside the optimum
        inst = build_instance(
            4,
            Fraction(5),
            [(1, 0, "one"), (1, 1, "one"), (1, 2, "one"), (1, 3, "alpha"), (3, 0, "alpha")],
        )
        on = run(Policy.on(BETA_REF), inst)
        chosen = by_ids(inst, "1.2", "1.3", "3")
        ropt = run_ropt(inst, chosen, on)
        owner = next(p for p in inst.arrivals if p.id == "3")
        chain = build_chain(on, ropt, chosen, owner, t=4)
        assert chain.steps == (2, 3)
        assert chain.status == "open"

    def test_preconditions(self):
        inst, on, chosen = demo_setup()
        ropt = run_ropt(inst, chosen, on)
        outsider = next(p for p in inst.arrivals if p.id == "1")
        with pytest.raises(ValueError):
            build_chain(on, ropt, chosen, outsider, t=3)
        early = next(p for p in inst.arrivals if p.id == "5")
        with pytest.raises(ValueError):
            build_chain(on, ropt, chosen, early, t=3)  # reference sends it at 7


class TestLedgerDemo:
    def test_charges(self):
        inst, on, chosen = demo_setup()
        ledger = build_ledger(inst, chosen, on, run_ropt(inst, chosen, on))

        by_kind = {}
        for rec in ledger.ropt_charges:
            by_kind.setdefault(rec.kind, []).append(rec)

        sent_steps = {rec.packet.id: rec.step for rec in by_kind[SENT_BY_BOTH]}
        assert sent_steps == {"2": 2, "2.1": 3, "2.2": 4, "5.1": 5, "5.2": 6}

        [evicted] = by_kind[EVICTED_ALPHA_INTERVAL]
        assert evicted.packet.id == "1.2"
        assert evicted.interval == (2, 6)
        assert evicted.amount == 2

        [preempted] = by_kind[PREEMPTED_INTERVAL]
        assert preempted.packet.id == "5"
        assert preempted.interval == (5, 6)  # two preempting alpha packets

        assert ledger.chains == ()

    def test_conservation(self):
        inst, on, chosen = demo_setup()
        ledger = build_ledger(inst, chosen, on, run_ropt(inst, chosen, on))
        assert sum(rec.amount for rec in ledger.ropt_charges) == total_value(inst, chosen) == 13
        assert sum(ledger.on_charges.values(), Fraction(0)) == on.totals == 11

    def test_verify_passes(self):
        inst, on, chosen = demo_setup()
        ledger = build_ledger(inst, chosen, on, run_ropt(inst, chosen, on))
        report = verify_ledger(ledger, inst, chosen, on)
        assert report.ok
        assert report.check("interval-exclusive").status == CheckStatus.PASS


class TestLedgerChainCharges:
    def test_deferred_eviction_closes_its_own_chain(self):
        inst = build_instance(
            2, Fraction(2), [(1, 0, "one"), (1, 1, "one"), (2, 0, "one"), (2, 1, "one")]
        )
        on = run(Policy.on(BETA_REF), inst)
        chosen = by_ids(inst, "1", "1.1", "2")
        ropt = run_ropt(inst, chosen, on)
        ledger = build_ledger(inst, chosen, on, ropt)
        [rec] = [r for r in ledger.ropt_charges if r.kind == EVICTED_ONE_CHAIN]
        assert rec.packet.id == "1.1"
        assert rec.step == 3
        assert rec.drop_step == 2
        [chain] = ledger.chains
        assert chain.status == "closed" and chain.steps == (3,)
        assert verify_ledger(ledger, inst, chosen, on).ok
        assert ledger.diagnostics["deferred-evictions"] == 1

    def test_rejection_charged_at_open_chain_head(self):
        # alternative optimal set {1.1, 2, 2.1}: the reference sends the
        # first alpha at step 1 (the policy sends a non-optimum packet),
        # leaving an open chain whose head absorbs the rejected packet
        inst = build_instance(
            2, Fraction(2), [(1, 0, "one"), (1, 1, "alpha"), (2, 0, "alpha"), (2, 1, "one")]
        )
        on = run(Policy.on(BETA_REF), inst)
        assert [p.id for p in on.sent] == ["1", "1.1", "2"]
        chosen = by_ids(inst, "1.1", "2", "2.1")
        assert total_value(inst, chosen) == 5
        assert feasible(inst, chosen)[0]
        ropt = run_ropt(inst, chosen, on)
        ledger = build_ledger(inst, chosen, on, ropt)
        [rec] = [r for r in ledger.ropt_charges if r.kind == REJECTED_ONE_CHAIN]
        assert rec.packet.id == "2.1"
        assert rec.step == 1
        [chain] = ledger.chains
        assert chain.owner.id == "1.1" and chain.status == "closed"
        report = verify_ropt(inst, chosen, on, ropt).merged(verify_ledger(ledger, inst, chosen, on))
        assert report.ok

    def test_preemption_charged_at_open_chain_head(self):
        # the reference runs ahead on 1.2 and then on the alpha packet
        # 1.3; when the threshold preempts 1.2 at step 3, the alpha's
        # chain from step 2 is open and takes the charge
        inst = build_instance(
            4,
            Fraction(5),
            [(1, 0, "one"), (1, 1, "one"), (1, 2, "one"), (1, 3, "alpha"), (3, 0, "alpha")],
        )
        on = run(Policy.on(BETA_REF), inst)
        assert [p.id for p in on.sent] == ["1", "1.1", "1.3", "3"]
        chosen = by_ids(inst, "1.2", "1.3", "3")
        ropt = run_ropt(inst, chosen, on)
        ledger = build_ledger(inst, chosen, on, ropt)
        [rec] = [r for r in ledger.ropt_charges if r.kind == PREEMPTED_OPEN_CHAIN]
        assert rec.packet.id == "1.2"
        assert rec.step == 2
        assert rec.drop_step == 3
        [chain] = ledger.chains
        assert chain.owner.id == "1.3" and chain.steps == (2,) and chain.status == "closed"
        report = verify_ropt(inst, chosen, on, ropt).merged(verify_ledger(ledger, inst, chosen, on))
        assert report.ok
        assert sum(r.amount for r in ledger.ropt_charges) == total_value(inst, chosen)

    def test_policy_matching_optimum_needs_no_chains(self):
        inst = build_instance(2, Fraction(2), [(1, 0, "alpha"), (2, 0, "one")])
        on = run(Policy.on(BETA_REF), inst)
        chosen = set(inst.arrivals)
        ledger = build_ledger(inst, chosen, on, run_ropt(inst, chosen, on))
        assert all(rec.kind == SENT_BY_BOTH for rec in ledger.ropt_charges)
        assert ledger.chains == ()


class TestRatioReport:
    def test_demo(self):
        report = ratio_report(demo_instance(Fraction(2)), Fraction(2))
        assert report.ratio == Fraction(13, 11)
        assert report.bound.bound == Fraction(3, 2)
        assert report.within_bound

    def test_blocking_family_ratio_one(self):
        report = ratio_report(greedy_blocking(Fraction(10)), BETA_REF)
        assert report.ratio == 1
        assert report.within_bound

    def test_empty_instance_ratio_one(self):
        report = ratio_report(build_instance(2, Fraction(2), []), BETA_REF)
        assert report.ratio == 1
        assert report.within_bound


class TestAnalyze:
    def test_demo_everything_passes(self):
        result = analyze(demo_instance(Fraction(2)), Fraction(2))
        assert result.report.ok
        assert result.ratio.ratio == Fraction(13, 11)
        names = {c.name for c in result.report.checks}
        assert {
            "optimum-contains-alpha-sends",
            "oracle-agreement",
            "ropt-capacity",
            "ropt-sends-all",
            "send-precedence",
            "chains-disjoint",
            "backlog-bound",
            "charging-complete",
            "charge-conservation",
            "interval-exclusive",
            "alpha-send-intervals",
            "chain-heads",
            "single-closure",
            "ratio-bound",
        } <= names

    def test_blocking_family_passes(self):
        for alpha in (Fraction(3, 2), Fraction(2), Fraction(10)):
            assert analyze(greedy_blocking(alpha), BETA_REF).report.ok

    def test_report_formatting(self):
        result = analyze(demo_instance(Fraction(2)), Fraction(2))
        text = format_report(result.report)
        assert "ratio-bound" in text and "PASS" in text

    def test_ledger_formatting_is_stable(self):
        result = analyze(demo_instance(Fraction(2)), Fraction(2))
        text = format_ledger(result.ledger)
        assert "ropt evicted-alpha-interval 1.2 2/1 interval 2 6" in text
        again = analyze(demo_instance(Fraction(2)), Fraction(2))
        assert format_ledger(again.ledger) == text
