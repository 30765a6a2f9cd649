"""Tabular views of verification reports."""

from pathlib import Path

import pandas as pd


def create_metric_table(rows):
    """
    Create a pandas DataFrame from one metric table of a report.

    Parameters
    ----------
    rows : list of dict
        Table rows as stored in the report

    Returns
    -------
    pd.DataFrame
        One row per entry, columns in first-seen order
    """
    if not rows:
        return pd.DataFrame()
    return pd.DataFrame(rows)


def table_paths(out_path, table_names):
    """CSV path per table: ``<stem>_<table>.csv`` next to the report."""
    out_path = Path(out_path)
    return {name: out_path.with_name(f"{out_path.stem}_{name}.csv") for name in table_names}


def write_tables(tables, out_path):
    """
    Write every metric table of a report as its own CSV file.

    Returns
    -------
    dict
        Table name -> written path
    """
    paths = table_paths(out_path, tables)
    for name, rows in tables.items():
        create_metric_table(rows).to_csv(paths[name], index=False)
    return paths


def create_summary_table(reports):
    """
    Create a pandas DataFrame with one line per verification report.

    Returns
    -------
    pd.DataFrame
        Columns: Suite, Fixture, Passed, Runtime (s), Tables, Rows
    """
    if not reports:
        return pd.DataFrame()

    results_list = []
    for report in reports:
        results_list.append({
            'Suite': report.suite,
            'Fixture': report.provenance.get('config', {}).get('fixture', ''),
            'Passed': report.passed,
            'Runtime (s)': f"{report.runtime:.2f}",
            'Tables': ', '.join(sorted(report.tables)),
            'Rows': sum(len(rows) for rows in report.tables.values()),
        })
    return pd.DataFrame(results_list)


def calculate_pass_stats(reports):
    """
    Calculate pass statistics over a set of reports.

    Returns
    -------
    dict
        Counts, pass percentage and total runtime
    """
    passed = sum(1 for report in reports if report.passed)
    return {
        'total_suites': len(reports),
        'passed_suites': passed,
        'failed_suites': len(reports) - passed,
        'pass_percentage': (passed / len(reports) * 100) if reports else 0,
        'total_runtime': sum(report.runtime for report in reports),
        'failed_names': [report.suite for report in reports if not report.passed],
    }
