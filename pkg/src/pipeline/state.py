"""
State management for the end-to-end run.
"""

from typing import Any, Dict, List, Optional, TypedDict


class RunState(TypedDict):
    """State carried between stages; plain values only."""
    # Input
    strategies: List[str]
    run_evaluation: bool

    # Stage outputs
    graph_summary: Dict[str, Any]
    trained: List[Dict[str, Any]]
    report_csv: Optional[str]
    report_table: Optional[str]

    # History
    completed_stages: List[str]
