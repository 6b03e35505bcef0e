"""
Annotated field types shared by the models
"""
from typing import Annotated, Any

import numpy as np
from pydantic import PlainSerializer, PlainValidator


def _as_complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError("complex numbers are given as [re, im]")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def _as_float_array(value: Any) -> np.ndarray:
    array = np.array(value, dtype=float)
    array.setflags(write=False)
    return array


def _as_complex_array(value: Any) -> np.ndarray:
    array = np.array(value, dtype=complex)
    array.setflags(write=False)
    return array


def _as_bool_array(value: Any) -> np.ndarray:
    array = np.array(value, dtype=bool)
    array.setflags(write=False)
    return array


Complex = Annotated[
    complex,
    PlainValidator(_as_complex),
    PlainSerializer(lambda z: [z.real, z.imag], return_type=list),
]
FloatArray = Annotated[
    np.ndarray,
    PlainValidator(_as_float_array),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]
ComplexArray = Annotated[
    np.ndarray,
    PlainValidator(_as_complex_array),
    PlainSerializer(lambda a: [[z.real, z.imag] for z in a.ravel()], return_type=list),
]
BoolArray = Annotated[
    np.ndarray,
    PlainValidator(_as_bool_array),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]


def _as_int_array(value: Any) -> np.ndarray:
    array = np.array(value, dtype=np.int64)
    array.setflags(write=False)
    return array


IntArray = Annotated[
    np.ndarray,
    PlainValidator(_as_int_array),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]
