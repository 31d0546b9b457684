import time
import asyncio
import logging
from concurrent.futures import Executor
from typing import Any, Callable, Dict, Optional, Set

logger = logging.getLogger(__name__)


class NodeScheduler:
    def __init__(self, max_concurrent_nodes: int = 1, executor: Optional[Executor] = None):
        """
        Run scan nodes on an executor with a bounded number in flight.

        Args:
            max_concurrent_nodes (int): Maximum number of nodes computed at once
            executor (Executor): Pool the node work runs on; None runs it in the default loop executor
        """
        if max_concurrent_nodes < 1:
            raise ValueError(f"max_concurrent_nodes must be >= 1, got {max_concurrent_nodes}")
        self.max_concurrent_nodes = max_concurrent_nodes
        self.executor = executor
        self.semaphore = asyncio.Semaphore(max_concurrent_nodes)
        self.in_flight: Set[str] = set()
        self.completed = 0
        self.failed = 0
        self.node_seconds = 0.0

    async def run(self, node_id: str, func: Callable[..., Any], *args: Any) -> Any:
        """
        Run func(*args) on the executor once a slot is free.

        Exceptions from func propagate after the node is counted as failed.
        """
        async with self.semaphore:
            self.in_flight.add(node_id)
            started = time.perf_counter()
            logger.debug(f"Node {node_id} started, {len(self.in_flight)} in flight")
            try:
                result = await asyncio.get_running_loop().run_in_executor(self.executor, func, *args)
            except Exception as e:
                self.failed += 1
                logger.debug(f"Node {node_id} raised {type(e).__name__}: {e}")
                raise
            finally:
                self.in_flight.discard(node_id)
                self.node_seconds += time.perf_counter() - started
            self.completed += 1
            logger.debug(f"Node {node_id} done")
            return result

    def status(self) -> Dict[str, Any]:
        return {
            'in_flight_nodes': len(self.in_flight),
            'in_flight_node_ids': sorted(self.in_flight),
            'completed_nodes': self.completed,
            'failed_nodes': self.failed,
            'max_concurrent_nodes': self.max_concurrent_nodes,
            'node_seconds': self.node_seconds,
        }
