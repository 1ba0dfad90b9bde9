from .base import RewardWeights, StepResult, TaskConfig, VecTask, compute_reward
from .motor import MotorTask, rotation_to_6d
from .nav import NavConfig, NavTask, squash_action
from .position import PositionTask, vehicle_to_world

TASKS = {"position": PositionTask, "motor": MotorTask, "nav": NavTask}


def make_task(name: str, robot, num_envs: int, seed: int = 0, **kw) -> VecTask:
    try:
        cls = TASKS[name]
    except KeyError:
        raise ValueError(f"unknown task {name!r}; choose from {sorted(TASKS)}") from None
    return cls(robot, num_envs, seed, **kw)


__all__ = [
    "TASKS",
    "MotorTask",
    "NavConfig",
    "NavTask",
    "PositionTask",
    "RewardWeights",
    "StepResult",
    "TaskConfig",
    "VecTask",
    "compute_reward",
    "make_task",
    "rotation_to_6d",
    "squash_action",
    "vehicle_to_world",
]
