from __future__ import annotations

import logging
import warnings
import xml.etree.ElementTree as ET
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Optional, Set, Tuple, Type

from pydantic import BaseModel as PydanticBaseModel
from pydantic import ValidationError, fields

logger = logging.getLogger(__name__)


class QuasimapError(Exception):
    """
    Root of every error raised by this package
    """


class ConfigError(QuasimapError, ValueError):
    """
    A job configuration could not be read.
    Syntax errors carry the parser position, semantic errors name the field.
    """

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.column = column
        self.field = field
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        elif field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class PresentationError(QuasimapError, ValueError):
    """
    The GIT data failed validation
    """


class PipelineIntegrityError(QuasimapError, ArithmeticError):
    """
    An exactness gate failed: a division left a remainder, a numerator was not
    anti-invariant, a coefficient was not z-Laurent, or a unit was zero
    """


class DeltaClearingRequired(PipelineIntegrityError):
    """
    Raised when the inverse of a non-unit factor is requested.
    Root factors must go through `weyl_numerator_factor` instead.
    """


class UnboundedFiberError(QuasimapError, ValueError):
    """
    The class search region is not compact
    """

    def __init__(self, message: str, direction: Tuple[Fraction, ...] = ()):
        self.direction = direction
        super().__init__(message)


class PresentationMixError(QuasimapError, ValueError):
    """
    Restricted and pushforward terms in one series
    """


class CorpusError(QuasimapError):
    """
    The regression corpus is missing or malformed
    """


class RationalValue(Fraction):
    """
    Type used for exact rational fields.
    Accepts ints, Fractions and "p/q" strings; floats are refused.
    """

    @classmethod
    def __get_validators__(cls):
        yield cls.validate

    @classmethod
    def validate(cls, v: Any) -> Fraction:
        if isinstance(v, float):
            raise TypeError("floating point values are not exact, use p/q")
        if isinstance(v, bool):
            raise TypeError("booleans are not rationals")
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError) as E:
            raise ValueError(f"not a rational number: {v!r}") from E


class TextField(str):
    """
    Type used to obtain the text value of a child element
    For instance `<theta>1 1</theta>`
    """

    pass


class ThisElementTextField(str):
    """
    Marker for "THIS element text"
    """

    pass


def parse_vector(text: str, field: str = "vector") -> Tuple[Fraction, ...]:
    """
    Read a whitespace or comma separated row of rationals
    """
    try:
        return tuple(Fraction(part) for part in text.replace(",", " ").split())
    except (ValueError, ZeroDivisionError) as E:
        raise ConfigError(f"not a row of rationals: {text!r}", field=field) from E


def parse_int_vector(text: str, field: str = "vector") -> Tuple[int, ...]:
    row = parse_vector(text, field)
    if any(entry.denominator != 1 for entry in row):
        raise ConfigError(f"expected integers, got {text!r}", field=field)
    return tuple(int(entry) for entry in row)


def parse_int_matrix(text: str, field: str = "matrix") -> Tuple[Tuple[int, ...], ...]:
    """
    Rows are separated by ';'
    """
    rows = tuple(parse_int_vector(row, field) for row in text.split(";") if row.strip())
    for index, row in enumerate(rows):
        if len(row) != len(rows[0]):
            raise ConfigError(f"ragged matrix {text!r}: row {index} has {len(row)} entries, row 0 has {len(rows[0])}", field=f"{field}[{index}]")
    return rows


class XmlToModel:
    """
    Reads an element into a pydantic model.
    Attributes map to scalar fields, child elements to nested models or
    to TextField values; '_' in field names reads as '-'.
    """

    def __init__(self, model_class: Type[PydanticBaseModel], element: ET.Element, strict: bool = True):
        self.model_class = model_class
        self.element = element
        self.strict = strict

    @staticmethod
    def attrib_name(field: fields.ModelField) -> str:
        """
        Return the attribute name expected for a given
        field name
        """
        return field.name.strip("_").replace("_", "-")

    @staticmethod
    def tag_name(field: fields.ModelField) -> str:
        """
        Return the tag name expected for a given
        field name
        """
        return field.name.strip("_").replace("_", "-")

    def _unused(self, kind: str, unused: Set[str]) -> Optional[Set[str]]:
        if not unused:
            return None
        message = f"Unknown {kind}: {sorted(unused)} in <{self.element.tag}>"
        if self.strict:
            raise ConfigError(message, field=self.element.tag)
        warnings.warn(message)
        return unused

    def check_unused_attribs(self) -> Optional[Set[str]]:
        """
        Check whether there are any attributes not listed in the "fields"
        """
        attribs = set(self.element.attrib.keys())
        known = set([self.attrib_name(f) for f in self.model_class.__fields__.values()])
        return self._unused("attributes", attribs.difference(known))

    def check_unused_elements(self) -> Optional[Set[str]]:
        """
        Check whether there are any elements not listed in the "fields"
        """
        tags = set([e.tag for e in self.element])
        known = set([self.tag_name(f) for f in self.model_class.__fields__.values()])
        return self._unused("elements", tags.difference(known))

    def from_element(self):
        def get_attrib(field: fields.ModelField):
            return self.element.get(self.attrib_name(field))

        def get_text(field: fields.ModelField):
            if field.shape == fields.SHAPE_LIST:
                return [(child.text or "").strip() for child in self.element.findall(self.tag_name(field))]
            text_element = self.element.find(self.tag_name(field))
            if text_element is None:
                return None
            return (text_element.text or "").strip()

        def get_element_text(field: fields.ModelField):
            return (self.element.text or "").strip() or None

        def get_nested_xml(field: fields.ModelField):
            if field.shape == fields.SHAPE_SINGLETON:
                element = self.element.find(self.tag_name(field))
                if element is None:
                    return None
                return XmlToModel(model_class=field.type_, element=element, strict=self.strict).from_element()

            if field.shape == fields.SHAPE_LIST:
                return [XmlToModel(model_class=field.type_, element=child, strict=self.strict).from_element() for child in self.element.findall(self.tag_name(field))]

        getters = {
            TextField: get_text,
            ThisElementTextField: get_element_text,
            XmlBaseModel: get_nested_xml,
            str: get_attrib,
            bool: get_attrib,
            int: get_attrib,
            Fraction: get_attrib,
            Enum: get_attrib,
        }

        data = dict()  # type: Dict[str, Any]
        for field in self.model_class.__fields__.values():  # type: fields.ModelField
            for type_, method in getters.items():
                if field.name not in data and isinstance(field.type_, type) and issubclass(field.type_, type_):
                    data[field.name] = method(field)
            if field.name not in data:
                warnings.warn(f"Encountered unlisted type: {field.type_}, using default Attrib method")
                data[field.name] = get_attrib(field)

        self.check_unused_attribs()
        self.check_unused_elements()

        # Missing values fall back to the model defaults
        data = {key: value for key, value in data.items() if value is not None}

        try:
            return self.model_class(**data)
        except ValidationError as E:
            logger.error(ET.tostring(self.element))
            logger.error(data)
            first = E.errors()[0]
            location = ".".join(str(part) for part in first["loc"])
            raise ConfigError(first["msg"], field=f"{self.element.tag}.{location}") from E


class XmlBaseModel(PydanticBaseModel):
    """
    Adds class methods
    to extract useful data in a "standard"
    way from an Element based on attribute names
    and types
    """

    @classmethod
    def from_element(cls, element: ET.Element, strict: bool = True):
        return XmlToModel(model_class=cls, element=element, strict=strict).from_element()

    @classmethod
    def from_text(cls, text: str, strict: bool = True):
        try:
            root = ET.fromstring(text)
        except ET.ParseError as E:
            line, column = E.position
            raise ConfigError(f"XML syntax error: {E}", line=line, column=column) from E
        return cls.from_element(root, strict=strict)

    def to_element(self, tag_name: Optional[str] = None) -> ET.Element:
        """
        Inverse of `from_element` for the configuration models
        """
        el = ET.Element(tag_name or self.__class__.__name__.lower())
        for field in self.__fields__.values():
            attr_key = field.name.strip("_").replace("_", "-")
            attr = getattr(self, field.name)
            if attr is None:
                continue
            if isinstance(field.type_, type) and issubclass(field.type_, XmlBaseModel):
                if field.shape == fields.SHAPE_LIST:
                    el.extend([a.to_element(attr_key) for a in attr])
                else:
                    el.append(attr.to_element(attr_key))
            elif isinstance(field.type_, type) and issubclass(field.type_, TextField):
                values = attr if field.shape == fields.SHAPE_LIST else [attr]
                for value in values:
                    ET.SubElement(el, attr_key).text = str(value)
            elif isinstance(field.type_, type) and issubclass(field.type_, ThisElementTextField):
                el.text = attr
            elif isinstance(attr, Enum):
                el.set(attr_key, str(attr.value))
            elif isinstance(attr, bool):
                el.set(attr_key, str(int(attr)))
            else:
                el.set(attr_key, str(attr))
        return el
