"""Parameter scan management and worker coordination."""

import asyncio
import logging
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence

from ..config import get_settings
from ..models.schemas import JobStatus, ScanSample

logger = logging.getLogger(__name__)


class ScanManager:
    """Evaluates independent scan samples on a bounded executor pool."""

    def __init__(
        self,
        max_workers: int = 4,
        executor: str = "thread",
        max_queue_size: int = 1000,
    ):
        """
        Initialize the scan manager.

        Args:
            max_workers: Maximum number of samples evaluated at once
            executor: "thread" or "process"
            max_queue_size: Maximum queued samples before submissions block
        """
        if executor not in ("thread", "process"):
            raise ValueError(f"Unknown executor kind: {executor}")
        self.max_workers = max_workers
        self.executor_kind = executor
        self.max_queue_size = max_queue_size

        # Sample storage and tracking
        self.samples: Dict[int, ScanSample] = {}
        self.results: Dict[int, Any] = {}
        self.sample_queue: Optional[asyncio.Queue] = None

        self._executor: Optional[Executor] = None
        self._semaphore: Optional[asyncio.Semaphore] = None
        self._workers: List[asyncio.Task] = []
        self._shutdown_event: Optional[asyncio.Event] = None
        self._running = False
        self._next_index = 0

        logger.info(f"ScanManager initialized: workers={max_workers}, executor={executor}")

    @classmethod
    def from_settings(cls) -> "ScanManager":
        config = get_settings().get_scan_config()
        return cls(max_workers=config["max_workers"], executor=config["executor"])

    async def start_workers(self) -> None:
        """Start the executor and background worker tasks."""
        if self._running:
            logger.warning("Workers already running")
            return
        self.sample_queue = asyncio.Queue(maxsize=self.max_queue_size)
        self._semaphore = asyncio.Semaphore(self.max_workers)
        self._shutdown_event = asyncio.Event()
        if self.executor_kind == "process":
            self._executor = ProcessPoolExecutor(max_workers=self.max_workers)
        else:
            self._executor = ThreadPoolExecutor(max_workers=self.max_workers)
        self._running = True

        for i in range(self.max_workers):
            self._workers.append(asyncio.create_task(self._worker_loop(f"worker-{i}"), name=f"scan-worker-{i}"))

    async def stop_workers(self) -> None:
        """Stop all worker tasks and release the executor."""
        if not self._running:
            return
        self._running = False
        if self._shutdown_event is not None:
            self._shutdown_event.set()
        for worker in self._workers:
            worker.cancel()
        if self._workers:
            await asyncio.gather(*self._workers, return_exceptions=True)
        self._workers.clear()
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None
        logger.info("All scan workers stopped")

    async def submit(self, fn: Callable[[float], Any], parameter: float) -> int:
        """Queue one sample; returns its index."""
        if not self._running or self.sample_queue is None:
            raise RuntimeError("ScanManager workers are not running")
        index = self._next_index
        self._next_index += 1
        self.samples[index] = ScanSample(index=index, parameter=float(parameter))
        await self.sample_queue.put((index, fn, float(parameter)))
        return index

    def cancel(self) -> int:
        """Mark every queued sample cancelled; returns how many were dropped."""
        dropped = 0
        if self.sample_queue is None:
            return dropped
        while not self.sample_queue.empty():
            index, _, _ = self.sample_queue.get_nowait()
            self.samples[index].status = JobStatus.CANCELLED
            self.sample_queue.task_done()
            dropped += 1
        logger.info(f"Cancelled {dropped} queued samples")
        return dropped

    def get_stats(self) -> Dict[str, int]:
        counts = {status.value: 0 for status in JobStatus}
        for sample in self.samples.values():
            counts[sample.status.value] += 1
        counts["max_workers"] = self.max_workers
        return counts

    async def run_scan(self, fn: Callable[[float], Any], parameters: Sequence[float]) -> List[Any]:
        """Evaluate fn at every parameter; results come back in submission order.

        A failed sample yields None and keeps its error on the sample record.
        """
        indices = [await self.submit(fn, p) for p in parameters]
        assert self.sample_queue is not None
        await self.sample_queue.join()
        return [self.results.get(i) for i in indices]

    async def _worker_loop(self, worker_name: str) -> None:
        assert self.sample_queue is not None and self._shutdown_event is not None
        try:
            while self._running and not self._shutdown_event.is_set():
                index, fn, parameter = await self.sample_queue.get()
                try:
                    await self._process_sample(index, fn, parameter, worker_name)
                finally:
                    self.sample_queue.task_done()
        except asyncio.CancelledError:
            logger.debug(f"{worker_name} cancelled")

    async def _process_sample(self, index: int, fn: Callable[[float], Any], parameter: float, worker_name: str) -> None:
        sample = self.samples[index]
        if sample.status == JobStatus.CANCELLED:
            return
        assert self._semaphore is not None
        async with self._semaphore:
            sample.status = JobStatus.RUNNING
            loop = asyncio.get_running_loop()
            try:
                self.results[index] = await loop.run_in_executor(self._executor, fn, parameter)
                sample.status = JobStatus.COMPLETED
                logger.debug(f"{worker_name} finished sample {index} at {parameter:.6g}")
            except Exception as e:
                logger.warning(f"Sample {index} at {parameter:.6g} failed: {e}")
                sample.status = JobStatus.FAILED
                sample.error = str(e)
                self.results[index] = None

    def map(self, fn: Callable[[float], Any], parameters: Sequence[float]) -> List[Any]:
        """Blocking scan for synchronous callers."""

        async def scan() -> List[Any]:
            async with self:
                return await self.run_scan(fn, parameters)

        return asyncio.run(scan())

    async def __aenter__(self):
        """Async context manager entry."""
        await self.start_workers()
        return self

    async def __aexit__(self, exc_type, exc_val, exc_tb):
        """Async context manager exit."""
        await self.stop_workers()
