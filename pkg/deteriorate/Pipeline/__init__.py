"""Pipeline module initialization"""
from .metrics import (
    GapEvent,
    LatencyCdf,
    compute_sleep_yield,
    compute_yield,
    gap_analysis,
    latency_cdf,
)
from .alerts import AlertLog, AlertReason, ComplianceAlert, compliance_check, evaluate_alert_rules
from .report import (
    ReliabilityReport,
    YieldReport,
    latency_summary,
    reliability_report,
    sleep_yield_groups,
    write_pipeline_report,
    yield_difference,
    yield_report,
)

__all__ = [
    'GapEvent', 'LatencyCdf', 'compute_sleep_yield', 'compute_yield', 'gap_analysis',
    'latency_cdf', 'AlertLog', 'AlertReason', 'ComplianceAlert', 'compliance_check',
    'evaluate_alert_rules', 'ReliabilityReport', 'YieldReport', 'latency_summary',
    'reliability_report', 'sleep_yield_groups', 'write_pipeline_report',
    'yield_difference', 'yield_report',
]
