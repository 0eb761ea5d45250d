"""Regenerate the checked-in fixture CSV tree (deterministic, synthetic).

The tree mimics a small batch: 5 algorithms x 2 iterations x 12 steps, with
simple closed-form series so tests can recompute every expected number.
Run from this directory: python make_fixture.py
"""

from pathlib import Path

HEADER = ("run_id,algorithm,iteration,step,n_susceptible,n_exposed,n_infected,"
          "msp,mrd,mc,n_contents,n_fake_contents,n_interactions_step")
ALGORITHMS = ("random", "popularity", "user_knn", "item_knn", "content_based")
STEPS = 12
N_USERS = 200


def series(algorithm: str, iteration: int, step: int) -> tuple[float, float, float]:
    if algorithm == "content_based":
        msp = 50.0  # constant series: the flat-line rendering case
    else:
        base = {"random": 20.0, "popularity": 60.0, "user_knn": 22.0,
                "item_knn": 10.0}[algorithm]
        msp = base + step + iteration
    if algorithm == "popularity":
        mrd = 0.1 if step % 2 == 0 else -0.1  # alternating about zero
    elif algorithm == "item_knn":
        mrd = -0.05
    else:
        mrd = 0.01 * iteration
    mc = {"random": 1.5, "popularity": 3.0, "user_knn": 1.4, "item_knn": 1.0,
          "content_based": 1.2}[algorithm] + 0.1 * iteration
    return msp, mrd, mc


def main() -> None:
    root = Path(__file__).parent / "batch"
    root.mkdir(exist_ok=True)
    summaries = []
    for algorithm in ALGORITHMS:
        for iteration in (1, 2):
            lines = [HEADER]
            totals = [0.0, 0.0, 0.0]
            for step in range(1, STEPS + 1):
                msp, mrd, mc = series(algorithm, iteration, step)
                n_inf = round(msp * N_USERS / 100)
                n_exp = 10
                n_sus = N_USERS - n_inf - n_exp
                lines.append(
                    f"{algorithm}_{iteration},{algorithm},{iteration},{step},"
                    f"{n_sus},{n_exp},{n_inf},{msp:.6f},{mrd:.6f},{mc:.6f},"
                    f"{400 + step},{40 + step // 3},{5}"
                )
                totals[0] += msp
                totals[1] += mrd
                totals[2] += mc
            (root / f"run_{algorithm}_{iteration}.csv").write_text(
                "\n".join(lines) + "\n")
            summaries.append((algorithm, iteration,
                              tuple(t / STEPS for t in totals)))

    lines = ["algorithm,iteration,mean_msp,mean_mrd,mean_mc"]
    for algorithm, iteration, (m1, m2, m3) in summaries:
        lines.append(f"{algorithm},{iteration},{m1:.6f},{m2:.6f},{m3:.6f}")
    means = {}
    for algorithm in ALGORITHMS:
        rows = [t for a, _, t in summaries if a == algorithm]
        means[algorithm] = tuple(sum(c) / len(c) for c in zip(*rows))
        m = means[algorithm]
        lines.append(f"{algorithm},ALL,{m[0]:.6f},{m[1]:.6f},{m[2]:.6f}")
    ranks = {
        a: tuple(
            sorted(ALGORITHMS, key=lambda x: means[x][m]).index(a) + 1
            for m in range(3)
        )
        for a in ALGORITHMS
    }
    for algorithm in ALGORITHMS:
        r = ranks[algorithm]
        lines.append(f"{algorithm},RANK,{r[0]},{r[1]},{r[2]}")
    (root / "summary.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote fixture tree to {root}")


if __name__ == "__main__":
    main()
