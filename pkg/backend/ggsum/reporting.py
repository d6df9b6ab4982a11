"""
Metric curves and CSV reports.

A MetricCurve holds one row per sweep abscissa with the analytic value and,
when Monte Carlo was requested, the MC estimate and its standard error.
CsvReport serialises frames with '#' metadata lines and 17 significant
digits so every number parses back to the identical double.
"""

import io
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

# Setup logging
logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'


@dataclass
class MetricCurve:
    """
    BER or outage values along a sweep.

    Attributes:
        abscissa_name (str): Column name of the sweep, e.g. "snr_db"
        metric_name (str): Metric prefix, e.g. "ber" or "outage"
        abscissa (list): Sweep values, strictly increasing
        values (list): Analytic values
        mc_values (list, optional): Monte Carlo estimates
        mc_stderr (list, optional): Standard errors of the MC estimates
    """

    abscissa_name: str
    metric_name: str
    abscissa: list
    values: list
    mc_values: list = None
    mc_stderr: list = None
    notes: list = field(default_factory=list)

    def __len__(self):
        return len(self.abscissa)

    @property
    def has_mc(self):
        return self.mc_values is not None

    def mc_curve(self):
        """The MC column as a curve of its own."""
        if not self.has_mc:
            raise ValueError("curve carries no Monte Carlo column")
        return MetricCurve(self.abscissa_name, self.metric_name, list(self.abscissa), list(self.mc_values))

    def to_frame(self):
        """
        Tabulate the curve.

        Returns:
            pandas.DataFrame: Columns <abscissa>, <metric>_analytic and, with MC,
            <metric>_mc and mc_stderr
        """
        data = {
            self.abscissa_name: np.asarray(self.abscissa, dtype=float),
            f"{self.metric_name}_analytic": np.asarray(self.values, dtype=float),
        }
        if self.has_mc:
            data[f"{self.metric_name}_mc"] = np.asarray(self.mc_values, dtype=float)
            data['mc_stderr'] = np.asarray(self.mc_stderr, dtype=float)
        return pd.DataFrame(data)


@dataclass
class CsvReport:
    """
    CSV document: '#' metadata lines, a header row, data rows and '#' trailer lines.

    Attributes:
        frame (pandas.DataFrame): The data rows
        metadata (list): (key, value) pairs written as '# key = value' before the header
        config_lines (list): 'key = value' echo of the RunConfig, written as '# config.key = value'
        trailer (list): (key, value) pairs written after the data
    """

    frame: pd.DataFrame
    metadata: list = field(default_factory=list)
    config_lines: list = field(default_factory=list)
    trailer: list = field(default_factory=list)

    def render(self):
        buffer = io.StringIO()
        for key, value in self.metadata:
            buffer.write(f"# {key} = {_format(value)}\n")
        for line in self.config_lines:
            buffer.write(f"# config.{line}\n")
        self.frame.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        for key, value in self.trailer:
            buffer.write(f"# {key} = {_format(value)}\n")
        return buffer.getvalue()

    def write(self, path=None, stream=None):
        """
        Write the report to ``path`` or to ``stream``.

        Returns:
            str: The rendered text
        """
        text = self.render()
        if path:
            with open(path, 'w', encoding='utf-8', newline='') as handle:
                handle.write(text)
            logger.info(f"Wrote {len(self.frame)} rows to {path}")
        elif stream is not None:
            stream.write(text)
        return text


def _format(value):
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    return str(value)


def read_report(path_or_text):
    """
    Parse a report back into (metadata dict, config lines, frame, trailer dict).

    Args:
        path_or_text (str): A file path, or the rendered text itself
    """
    if '\n' in path_or_text:
        text = path_or_text
    else:
        with open(path_or_text, 'r', encoding='utf-8') as handle:
            text = handle.read()

    metadata, config_lines, trailer, body = {}, [], {}, []
    seen_data = False
    for line in text.splitlines():
        if line.startswith('#'):
            entry = line[1:].strip()
            if entry.startswith('config.'):
                config_lines.append(entry[len('config.'):])
                continue
            # Keys may contain '=' (variant labels); the separator is always ' = '
            key, _, value = entry.partition(' = ')
            (trailer if seen_data else metadata)[key.strip()] = value.strip()
        else:
            seen_data = True
            body.append(line)
    frame = pd.read_csv(io.StringIO('\n'.join(body)), float_precision='round_trip')
    return metadata, config_lines, frame, trailer
