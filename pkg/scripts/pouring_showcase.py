"""Learn the pour/hold constraints from demonstrations and plan an execution.

    python scripts/pouring_showcase.py --jitter 0.02 --durations 6,5
"""

import argparse

from ttcl.pipeline import learn
from ttcl.ssttc import plan_bimanual
from ttcl.synth import generate, pouring_task_config
from ttcl.temporal import Action, classify_interval

POUR, HOLD = Action.parse("pour:milk"), Action.parse("hold:cup")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--demos", type=int, default=20)
    parser.add_argument("--jitter", type=float, default=0.02)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--durations", default="6,5", help="desired pour and hold durations")
    args = parser.parse_args()

    demos, _ = generate(pouring_task_config(n_demos=args.demos, seed=args.seed, jitter_sigma=args.jitter))
    model = learn(demos)
    print("learned constraints:")
    for (a, b), rel in sorted(model.sttcs.assignments.items()):
        print(f"  {a} {rel.value} {b}")

    relation, ssttcs = model.constraints_for(POUR, HOLD)
    print(f"\n{POUR} {relation.value} {HOLD}")
    for s in ssttcs:
        print(f"  {s.channel}: mean {s.mean:+.4f}  std {s.variance ** 0.5:.4f}  weight {s.weight:.3f}")

    durations = tuple(float(x) for x in args.durations.split(","))
    plan = plan_bimanual(relation, ssttcs, durations, model.epsilon)
    print(f"\nplan for durations {durations}  objective {plan.objective_value:.6f}")
    for e in plan.entries:
        print(f"  {e.hand:<5} {str(e.action):<10} start {e.start:.4f}  end {e.start + e.duration:.4f}")
    pour, hold = plan.entries
    print(f"planned relation: {classify_interval(pour.interval, hold.interval, model.epsilon).value}")


if __name__ == "__main__":
    main()
