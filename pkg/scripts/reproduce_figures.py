"""Write the data behind the meter and superoscillation figures as CSV files.

    python scripts/reproduce_figures.py [OUTDIR]

Every file is produced through the `twostate` CLI, so the same tables can be
regenerated one at a time from the shell.
"""
import sys
from pathlib import Path

from twostate.cli import main

RUNS = {
    # pre-selected only: two clusters for a strong meter, one broad peak at <sigma_xi> when weak
    "preonly_delta0.1.csv": ["density", "--post", "none", "--delta", "0.1"],
    "preonly_delta10.csv": ["density", "--post", "none", "--delta", "10"],
    # pre- and post-selected, from strong to weak
    "postselected_delta0.1.csv": ["density", "--delta", "0.1"],
    "postselected_delta0.25.csv": ["density", "--delta", "0.25"],
    "postselected_delta1.csv": ["density", "--delta", "1"],
    "postselected_delta10.csv": ["density", "--delta", "10"],
    "sample_delta10_seed0.csv": ["sample", "--delta", "10", "--trials", "10000", "--seed", "0"],
    # N = 20 collective spin
    "collective_n20_delta0.25.csv": ["collective", "--n", "20", "--delta", "0.25"],
    "collective_n20_delta0.01.csv": ["collective", "--n", "20", "--delta", "0.01"],
    # superoscillation and the shift superposition
    "superosc_sqrt2_n20.csv": ["superosc", "--alpha", "1.4142135623730951", "--terms", "20", "--window=-3,3", "--points", "601"],
    "superosc_alpha4_n20.csv": ["superosc", "--alpha", "4", "--terms", "20", "--window=-30,30", "--points", "601"],
    "shift_demo_14.csv": ["shift-demo", "--terms", "14", "--points", "321"],
}


def run(outdir: Path) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    for name, argv in RUNS.items():
        code = main([*argv, "--out", str(outdir / name)])
        if code:
            print(f"{name}: exit {code}", file=sys.stderr)
            return code
        print(outdir / name)
    return 0


if __name__ == "__main__":
    sys.exit(run(Path(sys.argv[1] if len(sys.argv) > 1 else "figures")))
