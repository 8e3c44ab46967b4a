"""Residual checkers, quadrature and parameter scans."""
from bitensionlab.verify.checks import (
    CHECKS,
    CheckInfo,
    CheckOptions,
    JetCache,
    check_cmc,
    check_commutation,
    check_hilbert,
    check_lemma,
    check_prop2,
    check_prop3_bound,
    check_s2form,
    check_tau2,
    check_thm1,
    check_thm2,
    check_thm3,
)
from bitensionlab.verify.quadrature import QuadratureGrid, SampleGrid, integrate_chart, parse_grid, point_grid
from bitensionlab.verify.report import ResidualReport, Verdict, reports_to_csv, reports_to_json, skipped_report
from bitensionlab.verify.scan import ScanResult, scan_family

__all__ = [
    "CHECKS",
    "CheckInfo",
    "CheckOptions",
    "JetCache",
    "QuadratureGrid",
    "ResidualReport",
    "SampleGrid",
    "ScanResult",
    "Verdict",
    "check_cmc",
    "check_commutation",
    "check_hilbert",
    "check_lemma",
    "check_prop2",
    "check_prop3_bound",
    "check_s2form",
    "check_tau2",
    "check_thm1",
    "check_thm2",
    "check_thm3",
    "integrate_chart",
    "parse_grid",
    "point_grid",
    "reports_to_csv",
    "reports_to_json",
    "scan_family",
    "skipped_report",
]
