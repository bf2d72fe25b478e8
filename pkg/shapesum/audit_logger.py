import json
import os
from datetime import datetime
from enum import Enum


class ActionType(Enum):
    EVALUATION = "evaluation"
    SWEEP = "sweep"
    VERIFICATION = "verification"
    SHAPE_CHECK = "shape_check"
    ERROR = "error"


class AuditLogger:
    """
    Appends one JSON entry per CLI run to a JSON-array audit file.
    """

    def __init__(self, log_path="logs/audit_log.json"):
        self.log_path = log_path
        directory = os.path.dirname(log_path)
        if directory:
            os.makedirs(directory, exist_ok=True)

    def log_action(self, action_type: ActionType, actor: str, status: str, details: dict = None):
        """
        Log an action to the audit log
        """
        log_entry = {
            "timestamp": datetime.now().isoformat(),
            "action_type": action_type.value,
            "actor": actor,
            "status": status,
            "details": details or {}
        }

        existing_logs = []
        if os.path.exists(self.log_path):
            try:
                with open(self.log_path, 'r', encoding='utf-8') as f:
                    content = f.read().strip()
                    if content:
                        existing_logs = json.loads(content)
                        if not isinstance(existing_logs, list):
                            existing_logs = [existing_logs]
            except (json.JSONDecodeError, ValueError):
                existing_logs = []

        existing_logs.append(log_entry)

        with open(self.log_path, 'w', encoding='utf-8') as f:
            json.dump(existing_logs, f, indent=2)

        return log_entry

    def log_evaluation(self, quantity: str, inputs: dict, value: complex, method: str, wall_time_ms: float):
        details = {
            "quantity": quantity,
            "inputs": inputs,
            "value": {"re": value.real, "im": value.imag},
            "method": method,
            "wall_time_ms": wall_time_ms,
        }
        return self.log_action(ActionType.EVALUATION, "cli", "success", details)

    def log_failure(self, command: str, payload: dict):
        return self.log_action(ActionType.ERROR, "cli", "error", {"command": command, **payload})
