import sys
import tempfile
from pathlib import Path

# Repo root on sys.path so the simulator package resolves
ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from simulator.modules.CsvWriter import write_csv
from simulator.modules.ExperimentConfig import parse_config
from simulator.modules.ExperimentRunner import run_experiment


def main():
    cfg = parse_config(
        "n_irs = 8\n"
        "schemes = proposed, heuristic, without_irs\n"
        "realizations = 2\n"
        "record_wall_time = false\n",
        "<smoke>",
    )
    rows = run_experiment(cfg)
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / 'smoke.csv'
        write_csv(rows, str(out))
        print(out.read_text(), end='')


if __name__ == '__main__':
    main()
