# ===========================================================================
# File: app/storage/results.py
# ===========================================================================
from pathlib import Path
from typing import List, Sequence, Union
import csv

from app.core.config import logger
from app.models.experiment import CSV_HEADER, ResultRow, RunSummary
from app.utils.helpers import format_number


def write_results_csv(rows: Sequence[ResultRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            data = row.model_dump()
            writer.writerow([format_number(data[name]) for name in CSV_HEADER])
    logger.info(f"{len(rows)} result rows written to {path}")
    return path


def read_results_csv(path: Union[str, Path]) -> List[ResultRow]:
    with open(path, newline="", encoding="utf-8") as handle:
        return [ResultRow(**record) for record in csv.DictReader(handle)]


def write_summary(summary: RunSummary, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(summary.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Summary written to {path}")
    return path
