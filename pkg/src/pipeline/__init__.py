"""
Pipeline commands and the end-to-end orchestrator.
"""

from src.pipeline.orchestrator import KGCompletionPipeline
from src.pipeline.state import RunState

__all__ = ["KGCompletionPipeline", "RunState"]
