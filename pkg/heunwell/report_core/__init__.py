"""
Report Core - Well presets and report templates
"""

from .report_helper import ReportHelper

__all__ = [
    "ReportHelper",
]
