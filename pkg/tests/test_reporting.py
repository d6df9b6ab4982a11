import io

import numpy as np
import pandas as pd
import pytest

from ggsum.reporting import CsvReport, MetricCurve, read_report


def sample_report():
    frame = pd.DataFrame({
        'snr_db': [0.0, 0.5, 1.0],
        'ber_analytic': [0.1 + 0.2, 1.0 / 3.0, 1e-300],
        'ber_mc': [0.30000000000000004, 0.33, 2.5e-7],
    })
    return CsvReport(frame,
                     metadata=[('tool', 'ggsum 1.0.0'), ('seed', 7)],
                     config_lines=['k = 2.0', 'sweep = 0:1:0.5'],
                     trailer=[('gap_db@1e-4', 1.25)])


def test_render_layout():
    lines = sample_report().render().splitlines()
    assert lines[0] == '# tool = ggsum 1.0.0'
    assert lines[1] == '# seed = 7'
    assert lines[2] == '# config.k = 2.0'
    assert lines[4] == 'snr_db,ber_analytic,ber_mc'
    assert lines[-1] == '# gap_db@1e-4 = 1.25'
    assert '0.30000000000000004' in lines[5]


def test_report_reads_back_exactly(tmp_path):
    report = sample_report()
    path = tmp_path / 'out.csv'
    text = report.write(str(path))
    assert path.read_text(encoding='utf-8') == text

    metadata, config_lines, frame, trailer = read_report(str(path))
    assert metadata == {'tool': 'ggsum 1.0.0', 'seed': '7'}
    assert config_lines == ['k = 2.0', 'sweep = 0:1:0.5']
    assert trailer == {'gap_db@1e-4': '1.25'}
    assert list(frame.columns) == list(report.frame.columns)
    for column in report.frame.columns:
        assert np.array_equal(frame[column].to_numpy(dtype=float), report.frame[column].to_numpy(dtype=float))


def test_write_to_stream():
    stream = io.StringIO()
    text = sample_report().write(stream=stream)
    assert stream.getvalue() == text
    assert read_report(text)[0]['seed'] == '7'


def test_curve_frames():
    curve = MetricCurve('threshold_db', 'outage', [-5.0, 0.0], [0.01, 0.2])
    assert len(curve) == 2
    assert list(curve.to_frame().columns) == ['threshold_db', 'outage_analytic']
    with pytest.raises(ValueError):
        curve.mc_curve()

    curve.mc_values, curve.mc_stderr = [0.011, 0.19], [1e-3, 4e-3]
    assert list(curve.to_frame().columns) == ['threshold_db', 'outage_analytic', 'outage_mc', 'mc_stderr']
    mc = curve.mc_curve()
    assert mc.values == [0.011, 0.19] and not mc.has_mc
