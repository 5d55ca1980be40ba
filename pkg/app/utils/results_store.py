"""
CSV results store with resume support and pandas summaries
"""
import csv
import json
import logging
import os
from pathlib import Path
from typing import Iterable, List, Set, Tuple

import pandas as pd

from app.errors import ResultsStoreError

# Configure logging
logger = logging.getLogger(__name__)

CSV_COLUMNS = ['planner', 'budget', 'env_seed', 'rep', 'solved', 'steps', 'mean_regret', 'wall_ms']
EXTRA_COLUMNS = ['total_reward']
RowKey = Tuple[str, int, int, int]


class ResultsStore:
    """Append-only experiment rows keyed by (planner, budget, env_seed, rep)"""

    def __init__(self, csv_path: str):
        self.csv_path = Path(csv_path)
        self.summary_path = self.csv_path.with_suffix('.summary.json')
        self.headers = CSV_COLUMNS + EXTRA_COLUMNS

    def ensure_writable(self):
        """Fail before any work if the output location cannot be written"""
        try:
            self.csv_path.parent.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ResultsStoreError(f"cannot create results directory {self.csv_path.parent}: {e}")
        target = self.csv_path if self.csv_path.exists() else self.csv_path.parent
        if not os.access(target, os.W_OK):
            raise ResultsStoreError(f"results path {self.csv_path} is not writable")
        if self.csv_path.exists() and self.csv_path.stat().st_size > 0:
            with open(self.csv_path, newline='') as f:
                header = next(csv.reader(f), [])
            if header != self.headers:
                raise ResultsStoreError(
                    f"existing results file {self.csv_path} has unexpected columns",
                    {"found": header, "expected": self.headers}
                )

    def completed_keys(self) -> Set[RowKey]:
        """Keys of rows already present, used to resume an interrupted sweep"""
        if not self.csv_path.exists() or self.csv_path.stat().st_size == 0:
            return set()
        try:
            df = pd.read_csv(self.csv_path, dtype={'planner': str})
        except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
            raise ResultsStoreError(f"cannot read results file {self.csv_path}: {e}")
        return {
            (str(row.planner), int(row.budget), int(row.env_seed), int(row.rep))
            for row in df.itertuples(index=False)
        }

    def append(self, rows: Iterable[dict]):
        """Append rows in the given order, writing the header for a new file"""
        rows = list(rows)
        if not rows:
            return
        new_file = not self.csv_path.exists() or self.csv_path.stat().st_size == 0
        try:
            with open(self.csv_path, 'a', newline='') as f:
                writer = csv.DictWriter(f, fieldnames=self.headers, extrasaction='ignore')
                if new_file:
                    writer.writeheader()
                writer.writerows(rows)
        except OSError as e:
            raise ResultsStoreError(f"failed to append to {self.csv_path}: {e}")
        logger.debug(f"📊 Appended {len(rows)} rows to {self.csv_path}")

    def load(self) -> pd.DataFrame:
        if not self.csv_path.exists():
            return pd.DataFrame(columns=self.headers)
        return pd.read_csv(self.csv_path, dtype={'planner': str})

    def summarize(self) -> List[dict]:
        """Mean and standard error of success, steps and regret per (planner, budget)"""
        df = self.load()
        if df.empty:
            return []
        df['solved'] = df['solved'].astype(int)
        grouped = df.groupby(['planner', 'budget'], sort=True)
        summary = []
        for (planner, budget), cell in grouped:
            entry = {"planner": planner, "budget": int(budget), "n": int(len(cell))}
            for column in ('solved', 'steps', 'mean_regret', 'total_reward'):
                values = cell[column].astype(float)
                stderr = float(values.std(ddof=1) / (len(values) ** 0.5)) if len(values) > 1 else 0.0
                entry[f"{column}_mean"] = float(values.mean())
                entry[f"{column}_stderr"] = stderr
            summary.append(entry)
        return summary

    def write_summary(self) -> List[dict]:
        summary = self.summarize()
        try:
            self.summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True))
        except OSError as e:
            raise ResultsStoreError(f"failed to write summary {self.summary_path}: {e}")
        logger.info(f"📊 Summary of {len(summary)} cells written to {self.summary_path}")
        return summary
