"""Compiled versus pure-Python choice kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--seed 0]

Times raw choice evaluations on every PMA of a national-size synthetic
market, then a full DA run, once per available kernel.
"""
import argparse
import random
import time
from dataclasses import replace

from gapmatch._backend import available_kernels
from gapmatch.choice import ChoiceKind, CompiledPMA
from gapmatch.engine import CompiledMarket, run_da
from gapmatch.model import apply_tie_breaking
from gapmatch.synth import SCALE_2020, generate


def bench_choice(strict, kernel, kind, draws, rng_seed):
    m = strict.market
    pmas = [CompiledPMA(r, m.populations(r.pma), strict.orders[r.pma], kernel) for r in m.reports]
    rng = random.Random(rng_seed)
    inputs = []
    for cp in pmas:
        n = len(cp.order)
        for _ in range(draws):
            k = rng.randint(0, n)
            inputs.append((cp, sorted(rng.sample(range(n), k))))
    t = time.perf_counter()
    for cp, apps in inputs:
        cp.choose_local(kind, apps)
    return time.perf_counter() - t, len(inputs)


def bench_da(strict, kernel, kind):
    t = time.perf_counter()
    cm = CompiledMarket(strict, kind, kernel)
    out = run_da(cm)
    return time.perf_counter() - t, len(out.rounds)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--draws", type=int, default=200, help="random applicant sets per PMA")
    args = ap.parse_args()

    strict = apply_tie_breaking(generate(replace(SCALE_2020, seed=args.seed)))
    kernels = available_kernels()
    print(f"kernels: {', '.join(kernels)}")
    print(f"{'kind':<20}{'kernel':<8}{'choice evals/s':>16}{'DA run (s)':>12}{'rounds':>8}")
    for kind in (ChoiceKind.Y2018, ChoiceKind.PREFER_MORE, ChoiceKind.PREFER_MORE_STAGED):
        for name, kernel in kernels.items():
            best_c = min(bench_choice(strict, kernel, kind, args.draws, args.seed)[0] for _ in range(args.repeat))
            _, n = bench_choice(strict, kernel, kind, args.draws, args.seed)
            da = [bench_da(strict, kernel, kind) for _ in range(args.repeat)]
            best_da = min(t for t, _ in da)
            print(f"{kind.value:<20}{name:<8}{n / best_c:>16.0f}{best_da:>12.3f}{da[0][1]:>8}")


if __name__ == "__main__":
    main()
