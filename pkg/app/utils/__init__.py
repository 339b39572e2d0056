from .helpers import format_number, group_by, sample_grid
