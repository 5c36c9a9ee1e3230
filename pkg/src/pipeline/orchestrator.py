"""
End-to-end pipeline orchestrator using LangGraph: ingest, train, then
evaluate when test sets are configured.
"""

import logging
from typing import Any, Dict, Optional, Sequence

from langgraph.checkpoint.memory import MemorySaver
from langgraph.graph import END, StateGraph

from src.config import PipelineConfig
from src.pipeline.commands import cmd_evaluate, cmd_ingest, cmd_train
from src.pipeline.state import RunState

logger = logging.getLogger(__name__)


class KGCompletionPipeline:
    """Runs the pipeline stages as a LangGraph workflow."""

    def __init__(self, pipeline_config: PipelineConfig, show_progress: bool = False):
        self.pipeline_config = pipeline_config
        self.show_progress = show_progress
        self.graph = self._build_graph()

    def _build_graph(self):
        """Build the LangGraph workflow."""
        workflow = StateGraph(RunState)

        workflow.add_node("ingest", self._ingest_node)
        workflow.add_node("train", self._train_node)
        workflow.add_node("evaluate", self._evaluate_node)

        workflow.set_entry_point("ingest")
        workflow.add_edge("ingest", "train")
        workflow.add_conditional_edges(
            "train",
            self._should_evaluate,
            {
                "evaluate": "evaluate",
                "end": END,
            },
        )
        workflow.add_edge("evaluate", END)

        memory = MemorySaver()
        return workflow.compile(checkpointer=memory)

    def _ingest_node(self, state: RunState) -> Dict[str, Any]:
        graph = cmd_ingest(self.pipeline_config)
        return {
            "graph_summary": {
                "nodes": graph.node_count,
                "edges": graph.edge_count,
                "node_types": graph.type_counts(),
                "stats": graph.stats.as_dict(),
            },
            "completed_stages": state["completed_stages"] + ["ingest"],
        }

    def _train_node(self, state: RunState) -> Dict[str, Any]:
        summaries = cmd_train(self.pipeline_config, state["strategies"], self.show_progress)
        trained = [
            {
                "strategy": s.strategy,
                "embeddings": str(s.embedding_path),
                "manifest": str(s.manifest_path),
                "vocab_size": s.vocab_size,
                "final_epoch_loss": s.loss_trace[-1] if s.loss_trace else None,
            }
            for s in summaries
        ]
        return {"trained": trained, "completed_stages": state["completed_stages"] + ["train"]}

    def _evaluate_node(self, state: RunState) -> Dict[str, Any]:
        result = cmd_evaluate(self.pipeline_config, state["strategies"])
        return {
            "report_csv": str(result["csv"]),
            "report_table": str(result["table"]),
            "completed_stages": state["completed_stages"] + ["evaluate"],
        }

    def _should_evaluate(self, state: RunState) -> str:
        """Evaluate only when requested and test sets are configured."""
        if state["run_evaluation"] and self.pipeline_config.paths.test_sets:
            return "evaluate"
        return "end"

    def run(
        self,
        strategies: Optional[Sequence[str]] = None,
        evaluate: bool = True,
        thread_id: str = "default",
    ) -> Dict[str, Any]:
        """
        Run ingest, train and (optionally) evaluate.

        Args:
            strategies: Strategies to train; ``walk.strategies`` when None
            evaluate: Run the evaluation stage when test sets are configured
            thread_id: Thread ID for state management

        Returns:
            Final run state
        """
        initial_state: RunState = {
            "strategies": list(strategies or self.pipeline_config.walk.strategies),
            "run_evaluation": evaluate,
            "graph_summary": {},
            "trained": [],
            "report_csv": None,
            "report_table": None,
            "completed_stages": [],
        }
        graph_config = {"configurable": {"thread_id": thread_id}}
        final_state = self.graph.invoke(initial_state, graph_config)
        logger.info("run finished stages=%s", ",".join(final_state["completed_stages"]))
        return dict(final_state)
