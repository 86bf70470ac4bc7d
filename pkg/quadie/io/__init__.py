from quadie.io.config import problem_to_dict, read_problem  # noqa
from quadie.io.output import (  # noqa
    dumps,
    write_json,
    write_solution_csv,
    write_trace_csv,
)
