"""CSV report files.

Every report starts with ``#`` comment lines carrying the config hash, the
seed and any accounting notes, followed by a fixed column header.
"""
import csv
from pathlib import Path

from exceptions import InvalidArgument


def report_header(config_hash, seed, notes=()):
    return [f'config_hash={config_hash}', f'seed={seed}', *notes]

def write_csv(path, columns, rows, header=()):
    path = Path(path)
    with open(path, 'w', newline='') as fp:
        for line in header:
            fp.write(f'# {line}\n')
        writer = csv.DictWriter(fp, fieldnames=columns, lineterminator='\n')
        writer.writeheader()
        for row in rows:
            missing = set(columns) - set(row)
            if missing:
                raise InvalidArgument(f'Report row lacks columns {sorted(missing)}.')
            writer.writerow({k: row[k] for k in columns})
    return path

def read_csv(path):
    """Rows of a report as dicts of strings, plus its ``#`` header lines."""
    header, body = [], []
    with open(path, newline='') as fp:
        for line in fp:
            (header if line.startswith('#') else body).append(line)
    return [h[1:].strip() for h in header], list(csv.DictReader(body))
