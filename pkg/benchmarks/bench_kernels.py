"""Compiled extension vs numpy fallback on the hot kernels.

    python benchmarks/bench_kernels.py [--sizes 16,32,64] [--repeat 5]
"""
import argparse

from wavenets import bench, kernels


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="16,32,64")
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    sizes = tuple(int(s) for s in args.sizes.split(","))
    if kernels.compiled_backend is None:
        print("compiled extension not built; showing the numpy fallback only")
    rows = bench.kernel_rows(sizes, repeat=args.repeat)
    for row in rows:
        if "compiled" in row:
            row["speedup"] = f"{row['python'] / row['compiled']:.2f}x"
    print(bench.format_table(rows))


if __name__ == "__main__":
    main()
