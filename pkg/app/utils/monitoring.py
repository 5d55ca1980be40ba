"""
Search monitoring
Operation timing, statistics and process health for planner runs
"""
import logging
import time
from collections import deque
from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum
from functools import wraps
from typing import Any, Callable, Dict, Optional

import psutil

from app.config import get_settings

# Configure logging
logger = logging.getLogger(__name__)


class OperationStatus(Enum):
    """Operation status types"""
    SUCCESS = "success"
    FAILURE = "failure"


@dataclass
class OperationLog:
    """Operation log entry"""
    timestamp: datetime
    operation_type: str
    status: OperationStatus
    duration_ms: float
    details: Dict[str, Any]
    error: Optional[str] = None


class SearchMonitor:
    """In-memory record of searches, episodes and experiment cells"""

    def __init__(self, max_logs: int = 10000):
        self.operation_logs = deque(maxlen=max_logs)

    def log_operation(
        self,
        operation_type: str,
        status: OperationStatus,
        details: Dict[str, Any],
        duration_ms: float = 0.0,
        error: Optional[str] = None
    ):
        """
        Record one operation

        Args:
            operation_type: e.g. 'search', 'episode', 'experiment_cell'
            status: Success or failure
            details: Operation-specific details
            duration_ms: Duration in milliseconds
            error: Error message if failed
        """
        self.operation_logs.append(OperationLog(
            timestamp=datetime.utcnow(),
            operation_type=operation_type,
            status=status,
            duration_ms=duration_ms,
            details=details,
            error=error
        ))
        if status == OperationStatus.FAILURE:
            logger.error(f"❌ {operation_type} failed after {duration_ms:.2f}ms: {error}")
        else:
            logger.debug(f"📊 {operation_type}: {status.value} ({duration_ms:.2f}ms)")

    def get_operation_stats(self, hours: int = 24) -> Dict[str, Any]:
        """Counts, success rate and mean duration per operation type"""
        cutoff = datetime.utcnow() - timedelta(hours=hours)
        recent_ops = [log for log in self.operation_logs if log.timestamp > cutoff]

        if not recent_ops:
            return {"total_operations": 0, "operation_types": {}}

        stats = {
            "total_operations": len(recent_ops),
            "success_rate": 100.0 * sum(log.status == OperationStatus.SUCCESS for log in recent_ops) / len(recent_ops),
            "avg_duration_ms": sum(log.duration_ms for log in recent_ops) / len(recent_ops),
            "operation_types": {}
        }
        for op_type in sorted({log.operation_type for log in recent_ops}):
            type_ops = [log for log in recent_ops if log.operation_type == op_type]
            stats["operation_types"][op_type] = {
                "count": len(type_ops),
                "avg_time": sum(log.duration_ms for log in type_ops) / len(type_ops),
                "failures": sum(log.status == OperationStatus.FAILURE for log in type_ops)
            }
        return stats

    def health_check(self) -> Dict[str, Any]:
        """Memory usage of the host against the configured warning threshold"""
        threshold = get_settings().memory_warning_percent
        try:
            memory = psutil.virtual_memory()
        except Exception as e:
            return {"status": "critical", "error": str(e), "alerts": [f"Memory check failed: {e}"]}

        status = "healthy" if memory.percent < threshold else "warning"
        report = {
            "status": status,
            "memory_percent": memory.percent,
            "available_gb": round(memory.available / (1024 ** 3), 2),
            "process_rss_mb": round(psutil.Process().memory_info().rss / (1024 ** 2), 1),
            "alerts": [] if status == "healthy" else [f"High memory usage: {memory.percent:.1f}%"]
        }
        if status != "healthy":
            logger.warning(f"⚠️ High memory usage: {memory.percent:.1f}%")
        return report


def monitor_operation(operation_type: str):
    """
    Decorator that times a synchronous call and records it in global_monitor

    Usage:
        @monitor_operation("episode")
        def online_episode(...):
            ...
    """
    def decorator(func: Callable):
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                global_monitor.log_operation(
                    operation_type=operation_type,
                    status=OperationStatus.FAILURE,
                    details={"function": func.__name__},
                    duration_ms=(time.perf_counter() - start_time) * 1000,
                    error=str(e)
                )
                raise
            global_monitor.log_operation(
                operation_type=operation_type,
                status=OperationStatus.SUCCESS,
                details={"function": func.__name__, "result_type": type(result).__name__},
                duration_ms=(time.perf_counter() - start_time) * 1000
            )
            return result
        return wrapper
    return decorator


global_monitor = SearchMonitor()
