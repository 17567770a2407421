"""Compare the built-in distortion-sampling schemes.

Samples 20,000 plans per scheme and prints the distortion-count and
severity-level histograms, making the different stacking policies visible:
the challenge scheme draws 1..5 distinct-group distortions with uniform
levels, the mild/moderate/heavy schemes shift a gaussian over the levels,
and the heavy scheme always stacks exactly six.
"""

from collections import Counter

from wilddistort import BUILTIN_SCHEMES, SeededRng, sample_plan
from wilddistort.severity import SeverityTable


def main():
    table = SeverityTable.default()
    root = SeededRng(11)
    n = 20_000
    for name in sorted(BUILTIN_SCHEMES):
        scheme = BUILTIN_SCHEMES[name]
        counts = Counter()
        levels = Counter()
        for i in range(n):
            plan = sample_plan(f"{name}/{i}", scheme,
                               root.derive(f"plan/{name}/{i}"), table)
            counts[len(plan.specs)] += 1
            for spec in plan.specs:
                levels[spec.level] += 1
        total_levels = sum(levels.values())
        count_str = "  ".join(f"{k}:{100 * v / n:4.1f}%"
                              for k, v in sorted(counts.items()))
        level_str = "  ".join(f"L{k}:{100 * v / total_levels:4.1f}%"
                              for k, v in sorted(levels.items()))
        rule = (f"N({scheme.severity_mean}, {scheme.severity_std})"
                if scheme.severity_mean is not None else "uniform")
        print(f"{name:14s} count {count_str}")
        print(f"{'':14s} level {level_str}   (severity: {rule}, "
              f"distinct groups: {scheme.distinct_groups})")
        print()


if __name__ == "__main__":
    main()
