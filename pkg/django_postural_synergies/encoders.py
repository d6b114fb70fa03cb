import dataclasses
from enum import Enum

import numpy as np
from django.core.serializers.json import DjangoJSONEncoder


class BaseEncoder(DjangoJSONEncoder):
    """
    Everything that DjangoJSONEncoder can handle plus numpy values and domain objects
    """

    def default(self, o):
        if hasattr(o, "as_data"):
            return o.as_data()
        if isinstance(o, Enum):
            return o.value
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if dataclasses.is_dataclass(o) and not isinstance(o, type):
            return dataclasses.asdict(o)
        return super().default(o)
