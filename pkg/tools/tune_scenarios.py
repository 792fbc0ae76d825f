"""Developer harness: run baseline/constrained/optimal for every bundled
scenario, print returns and timings, and flag directionality failures."""

import sys
import time

from resplan import assess, planner, scenarios


def main(names=None):
    names = names or scenarios.BUNDLED_NAMES
    ok = True
    for name in names:
        s = scenarios.bundled(name)
        model = s.assessment_model()
        scoring = s.assessment_preferences

        t0 = time.perf_counter()
        base_plan = planner.plan_with_preferences(s.world, s.operator_preferences)
        t_base = time.perf_counter() - t0

        t0 = time.perf_counter()
        cons_plan = planner.plan_with_preferences(
            s.world, s.planning_preferences(s.reference_constraints))
        t_cons = time.perf_counter() - t0

        t0 = time.perf_counter()
        base_ret = assess.expected_return(base_plan, model, scoring)
        cons_ret = assess.expected_return(cons_plan, model, scoring)
        t_eval = time.perf_counter() - t0

        t0 = time.perf_counter()
        opt = assess.optimal_return(model, scoring)
        t_opt = time.perf_counter() - t0

        b, c, o = (base_ret.expected_return, cons_ret.expected_return,
                   opt.plan_value)
        flag = "OK " if b < c <= o + 1e-9 else "FAIL"
        if flag == "FAIL":
            ok = False
        print(f"{name}: base={b:.3f} cons={c:.3f} opt={o:.3f} "
              f"policy={opt.policy_value:.3f}  [{flag}]")
        print(f"    plan(base)={t_base:.2f}s plan(cons)={t_cons:.2f}s "
              f"eval={t_eval:.2f}s optimal={t_opt:.2f}s "
              f"memo={len(assess._Assessor(model, scoring, None, 10).__dict__) and ''}")
        print(f"    base acts={base_plan.action_count} score={base_plan.score}"
              f" | cons acts={cons_plan.action_count} score={cons_plan.score}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:] or None))
