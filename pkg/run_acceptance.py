"""Run the acceptance catalogue and print a pass/fail summary."""

import logging
import sys

import numpy as np

from warpkit.energy import calculus_checks, function_from_spec, time_discretize
from warpkit.reporting import calculate_pass_stats, create_summary_table
from warpkit.verification import build_fixture, make_config, run_suite

# (suite, config overrides) in catalogue order
ACCEPTANCE_RUNS = [
    ('dist_factorization', {'fixture': 'cone'}),
    ('dist_factorization', {'fixture': 'suspension'}),
    ('tensorization', {}),
    ('warp_gradient', {}),
    ('stl', {'fixture': 'cone'}),
    ('stl', {'fixture': 'cylinder'}),
    ('density', {}),
    ('capacity', {}),
    ('doubling', {}),
]

INVARIANT_FIXTURES = ('square', 'cylinder', 'cone', 'suspension')


def exact_invariant_checks(resolution=16):
    """Slope calculus and constant preservation on every fixture; returns failure messages."""
    failures = []
    for fixture in INVARIANT_FIXTURES:
        product = build_fixture(fixture, resolution, {'stencil': 'diagonal'})
        f = function_from_spec(product, {'kind': 'sin_product', 'params': [1.0, 1.0, 0]})
        g = function_from_spec(product, {'kind': 'sin_t', 'params': [3.0]})

        # f = 0 + sin(t) sin(x_0) in split form
        x = product.base.coordinates[:, 0]
        split = (np.zeros_like(x), np.sin(product.profile.levels), np.sin(x))

        report = calculus_checks(f, g, alpha=2.0, beta=-0.5, L=3.0, split=split)
        if not report.passed:
            failures.append(f"{fixture}: {report.summary()}")

        if not product.apex_levels:
            constant = function_from_spec(product, {'kind': 'constant', 'params': [2.5]})
            change = np.abs(time_discretize(constant, 1).values - 2.5).max()
            if change > 1e-12:
                failures.append(f"{fixture}: constant changed by {change:.3g}")
    return failures


def main():
    logging.basicConfig(level=logging.WARNING, format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    print("=" * 70)
    print("ACCEPTANCE CATALOGUE")
    print("=" * 70)

    reports = []
    for k, (suite, overrides) in enumerate(ACCEPTANCE_RUNS, start=1):
        config = make_config(suite, overrides)
        print(f"\n{k}. {suite} on {config.fixture}...")
        try:
            report = run_suite(config)
        except RuntimeError as e:
            print(f"   ❌ Error: {e}")
            return 1
        reports.append(report)
        mark = "✅" if report.passed else "❌"
        print(f"   {mark} {'passed' if report.passed else 'FAILED'} in {report.runtime:.2f}s  {report.summary}")

    print(f"\n{len(ACCEPTANCE_RUNS) + 1}. exact discrete invariants...")
    failures = exact_invariant_checks()
    if failures:
        for message in failures:
            print(f"   ❌ {message}")
    else:
        print("   ✅ zero violations on every fixture")

    stats = calculate_pass_stats(reports)
    print("\n" + "=" * 70)
    print(create_summary_table(reports).to_string(index=False))
    print("=" * 70)
    print(f"Suites passed: {stats['passed_suites']}/{stats['total_suites']} "
          f"({stats['pass_percentage']:.0f}%), total runtime {stats['total_runtime']:.1f}s")
    if stats['failed_names']:
        print(f"Failed: {', '.join(stats['failed_names'])}")

    all_passed = not stats['failed_suites'] and not failures
    print("✅ ALL ACCEPTANCE CHECKS PASSED" if all_passed else "❌ ACCEPTANCE FAILED")
    print("=" * 70)
    return 0 if all_passed else 1


if __name__ == '__main__':
    sys.exit(main())
