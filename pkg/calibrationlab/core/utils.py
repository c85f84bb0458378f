import json
import math

from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields, is_dataclass
from fractions import Fraction
from typing import List
from collections.abc import Mapping, Sequence

from .base import BaseCertificate
from .exact import QSqrt3
from .geometry import Vec2


class ParallelManager(object):
    """
    ordered parallel map over a thread pool; imap hands out each result as soon
    as it and every earlier one are done, and the exception of the lowest
    failing task is re-raised in the caller
    """
    def __init__(self, num_parallel):
        assert num_parallel >= 1, f'num_parallel must be positive, got {num_parallel}'
        self.num_parallel = num_parallel

    def map(self, target, args: List):
        return list(self.imap(target, args))

    def imap(self, target, args: List):
        args = list(args)
        if not args:
            return
        with ThreadPoolExecutor(max_workers=min(self.num_parallel, len(args)), thread_name_prefix='worker') as pool:
            futures = [pool.submit(target, arg) for arg in args]
            try:
                for future in futures:
                    yield future.result()
            finally:
                # tasks not yet started are dropped when the caller stops early or a task fails
                for future in futures:
                    future.cancel()


def to_jsonable(data, exact=False):
    """
    recursively turn certificates, vectors and exact numbers into JSON values;
    exact numbers become strings such as "1/2+sqrt3" when `exact` is set
    """
    if data is None or isinstance(data, (bool, str)):
        return data
    if isinstance(data, int):
        return data
    if isinstance(data, (QSqrt3, Fraction)):
        if exact:
            return str(data)
        return float(data)
    if isinstance(data, float):
        if not math.isfinite(data):
            return repr(data)
        return data
    if isinstance(data, Vec2):
        return [to_jsonable(data.x, exact), to_jsonable(data.y, exact)]
    if isinstance(data, BaseCertificate):
        return data.to_dict(exact)
    if hasattr(data, "to_dict") and callable(data.to_dict) and not isinstance(data, Mapping):
        return to_jsonable(data.to_dict(), exact)
    if is_dataclass(data):
        return {f.name: to_jsonable(getattr(data, f.name), exact) for f in fields(data) if f.repr}
    if isinstance(data, Mapping):
        return {str(key): to_jsonable(data[key], exact) for key in data}
    elif isinstance(data, tuple) and hasattr(data, '_fields'):  # namedtuple
        return {k: to_jsonable(v, exact) for k, v in zip(data._fields, data)}
    elif isinstance(data, (set, frozenset)):
        return [to_jsonable(elem, exact) for elem in sorted(data, key=repr)]
    elif isinstance(data, Sequence):
        return [to_jsonable(elem, exact) for elem in data]
    if hasattr(data, 'item'):  # numpy / torch scalars
        return to_jsonable(data.item(), exact)

    raise TypeError(f"unsupported type of data {type(data)}")


def dumps(data, exact=False) -> str:
    """
    deterministic JSON text; floats are written with repr, the shortest text that round-trips
    """
    return json.dumps(to_jsonable(data, exact), indent=2, sort_keys=False, ensure_ascii=False)
