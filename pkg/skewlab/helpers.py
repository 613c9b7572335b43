import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, List, Optional, Tuple, Type, Union

import numpy as np
from typing_extensions import Annotated, get_args, get_origin

from skewlab.types import AnnotationNameT, T


def initialize(classes: Iterable[Type]) -> List:
    return [cls_object() for cls_object in classes]


def extract_type(value: Union[Type[T], Annotated[T, AnnotationNameT]]) -> Tuple[Any, Optional[AnnotationNameT]]:
    if get_origin(value) is Annotated:
        dtype, annotation, *_ = get_args(value)  # first two parameters - (type, annotation)
        return dtype, annotation
    return value, None


def make_rng(seed: int) -> np.random.Generator:
    """
    The single pseudorandom source of the package: numpy's ``default_rng`` (PCG64) seeded with a 64-bit integer.
    """
    return np.random.default_rng(int(seed) % 2**64)


def atomic_write(path: Union[str, Path], content: str) -> Path:
    """
    Write ``content`` to a temporary sibling of ``path`` and rename it into place, so readers never see
    a partial file.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    handle, temp_name = tempfile.mkstemp(dir=str(target.parent), prefix=".{}.".format(target.name), suffix=".tmp")
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="") as stream:
            stream.write(content)
        os.replace(temp_name, target)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    return target


def format_float(value: float) -> str:
    return repr(float(value))
