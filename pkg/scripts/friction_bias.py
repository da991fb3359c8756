"""Normal-estimate bias on the flat plate versus the friction coefficient.

Without the estimator the force direction leans by atan(mu) against the
motion; with it the lean should vanish. Prints one row per mu.
"""

import argparse
import math

from hybridfm import scenario as sc
from hybridfm import sim


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--mu", type=float, nargs="+", default=[0.1, 0.2, 0.3, 0.5])
    parser.add_argument("--duration", type=float, default=10.0, help="simulated seconds per run")
    args = parser.parse_args()

    print(f"{'mu':>5} {'atan(mu)':>9} {'off':>8} {'on':>8} {'mu_final':>9}")
    for mu in args.mu:
        scenario = sc.load("plane_line", [f"contact.mu={mu}", f"duration={args.duration}"])
        result = sim.compare(scenario)
        on, off = result.on[1], result.off[1]
        print(f"{mu:5.2f} {math.degrees(math.atan(mu)):9.2f} {math.degrees(off.normal_angle_error_mean):8.2f} "
              f"{math.degrees(on.normal_angle_error_mean):8.3f} {on.mu_final:9.4f}")


if __name__ == "__main__":
    main()
