import functools
import logging
import time


class TimeController:
    """Wall-clock timing of driver steps

        @timer.timeit
    """

    def timeit(self, func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start = time.time()
            result = func(*args, **kwargs)
            time_in_sec = time.time() - start
            minutes, seconds = divmod(time_in_sec, 60)
            hours, minutes = divmod(minutes, 60)
            if hours >= 1:
                logging.info(f"Execution time of {func.__name__} is {int(hours)} hours "
                             f"{int(minutes)} minutes {int(seconds)} seconds")
            elif minutes >= 1:
                logging.info(f"Execution time of {func.__name__} is {int(minutes)} minutes "
                             f"{int(seconds)} seconds")
            else:
                logging.info(f"Execution time of {func.__name__} is {time_in_sec:.2f} seconds")
            return result

        return wrapper
