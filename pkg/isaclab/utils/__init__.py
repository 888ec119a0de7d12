from .time_controller import TimeController
