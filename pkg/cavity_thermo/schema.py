"""Schema validation for configuration sections."""

import fnmatch
import math
import re
from enum import Enum
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Union

from .errors import ConfigError


class FieldType(Enum):
    """Supported field types for schema validation."""

    STRING = "string"
    INTEGER = "integer"
    FLOAT = "float"  # ints are accepted and widened
    BOOLEAN = "boolean"
    COMPLEX = "complex"  # any real or complex number
    LIST = "list"  # a bare scalar becomes a one-item list
    ANY = "any"


class ValidationError(ConfigError):
    """Raised when a configuration value fails schema validation."""

    pass


class Field:
    """Schema field definition."""

    def __init__(
        self,
        name: str,
        field_type: FieldType = FieldType.ANY,
        required: bool = False,
        nullable: bool = False,
        min_value: Optional[Union[int, float]] = None,
        max_value: Optional[Union[int, float]] = None,
        pattern: Optional[str] = None,
        enum: Optional[List[Any]] = None,
        validator: Optional[Callable[[Any], bool]] = None,
        item_type: Optional[FieldType] = None,
    ):
        """
        Define a schema field.

        Args:
            name: Key name
            field_type: Expected type
            required: Whether the key must be present
            nullable: Whether the value can be null
            min_value: Minimum value for numbers (inclusive)
            max_value: Maximum value for numbers (inclusive)
            pattern: Regex pattern for strings
            enum: List of allowed values
            validator: Custom validation function
            item_type: Element type for ``FieldType.LIST``
        """
        self.name = name
        self.field_type = field_type
        self.required = required
        self.nullable = nullable
        self.min_value = min_value
        self.max_value = max_value
        self.pattern = pattern
        self.enum = enum
        self.validator = validator
        self.item_type = item_type

    def validate(self, value: Any, line: Optional[int] = None) -> Any:
        """
        Validate a value and return its normalized form.

        Args:
            value: Parsed value
            line: Source line, for error messages

        Returns:
            The value, widened to the field type where that is lossless

        Raises:
            ValidationError: If validation fails
        """
        if value is None:
            if not self.nullable:
                raise ValidationError(f"'{self.name}' cannot be null", line=line, field=self.name)
            return None

        if self.field_type == FieldType.LIST:
            items = list(value) if isinstance(value, list) else [value]
            if self.item_type is None:
                return items
            item_field = Field(
                self.name, self.item_type, min_value=self.min_value, max_value=self.max_value
            )
            return [item_field.validate(item, line) for item in items]

        value = self._coerce(value, line)

        if isinstance(value, (int, float)) and not isinstance(value, bool):
            if isinstance(value, float) and math.isnan(value):
                raise ValidationError(f"'{self.name}' cannot be nan", line=line, field=self.name)
            if self.min_value is not None and value < self.min_value:
                raise ValidationError(
                    f"'{self.name}' value {value} is less than minimum {self.min_value}",
                    line=line,
                    field=self.name,
                )
            if self.max_value is not None and value > self.max_value:
                raise ValidationError(
                    f"'{self.name}' value {value} is greater than maximum {self.max_value}",
                    line=line,
                    field=self.name,
                )

        if isinstance(value, str) and self.pattern is not None:
            if not re.match(self.pattern, value):
                raise ValidationError(
                    f"'{self.name}' value '{value}' does not match pattern '{self.pattern}'",
                    line=line,
                    field=self.name,
                )

        if self.enum is not None and value not in self.enum:
            raise ValidationError(
                f"'{self.name}' value '{value}' not in allowed values: {self.enum}",
                line=line,
                field=self.name,
            )

        if self.validator is not None:
            try:
                ok = self.validator(value)
            except Exception as e:
                raise ValidationError(
                    f"'{self.name}' validation error: {e}", line=line, field=self.name
                ) from e
            if not ok:
                raise ValidationError(
                    f"'{self.name}' failed custom validation", line=line, field=self.name
                )

        return value

    def _coerce(self, value: Any, line: Optional[int]) -> Any:
        kind = self.field_type
        is_bool = isinstance(value, bool)

        def fail(expected: str) -> ValidationError:
            return ValidationError(
                f"'{self.name}' must be {expected}, got {type(value).__name__}",
                line=line,
                field=self.name,
            )

        if kind == FieldType.STRING and not isinstance(value, str):
            raise fail("a string")
        if kind == FieldType.INTEGER and (is_bool or not isinstance(value, int)):
            raise fail("an integer")
        if kind == FieldType.BOOLEAN and not is_bool:
            raise fail("a boolean")
        if kind == FieldType.FLOAT:
            if is_bool or not isinstance(value, (int, float)):
                raise fail("a number")
            return float(value)
        if kind == FieldType.COMPLEX:
            if is_bool or not isinstance(value, (int, float, complex)):
                raise fail("a number")
            return complex(value)
        return value


class Schema:
    """Schema for one configuration section."""

    def __init__(self, section: str, fields: List[Field], strict: bool = True):
        """
        Define a schema for a section.

        Args:
            section: Section name; shell-style wildcards match families
                such as ``channel *``
            fields: List of field definitions
            strict: If True, keys not declared in the schema are rejected
        """
        self.section = section
        self.fields = {f.name: f for f in fields}
        self.strict = strict

    def matches(self, section: str) -> bool:
        return fnmatch.fnmatchcase(section, self.section)

    def validate(
        self,
        values: Mapping[str, Any],
        section: Optional[str] = None,
        lines: Optional[Mapping[Tuple[str, str], int]] = None,
    ) -> Dict[str, Any]:
        """
        Validate one section.

        Args:
            values: Parsed ``{key: value}`` of the section
            section: Actual section name (defaults to the schema's)
            lines: ``(section, key) -> line`` map for error messages

        Returns:
            Normalized values, declared keys only

        Raises:
            ValidationError: On a missing, unknown or invalid key
        """
        name = section or self.section
        lines = lines or {}
        header_line = lines.get((name, ""))

        for field_name, spec in self.fields.items():
            if spec.required and field_name not in values:
                raise ValidationError(
                    f"missing required key in [{name}]", line=header_line, field=field_name
                )

        if self.strict:
            for key in values:
                if key not in self.fields:
                    raise ValidationError(
                        f"unknown key in [{name}]",
                        line=lines.get((name, key), header_line),
                        field=key,
                    )

        normalized: Dict[str, Any] = {}
        for key, value in values.items():
            spec = self.fields.get(key)
            if spec is None:
                normalized[key] = value
                continue
            normalized[key] = spec.validate(value, lines.get((name, key), header_line))
        return normalized


class ConfigSchema:
    """Validator for a whole document with several section schemas."""

    def __init__(self, schemas: List[Schema], strict: bool = True):
        """
        Args:
            schemas: Section schemas, matched in order
            strict: If True, sections without a schema are rejected
        """
        self.schemas = schemas
        self.strict = strict

    def schema_for(self, section: str) -> Optional[Schema]:
        for schema in self.schemas:
            if schema.matches(section):
                return schema
        return None

    def validate(
        self,
        document: Mapping[str, Mapping[str, Any]],
        lines: Optional[Mapping[Tuple[str, str], int]] = None,
    ) -> Dict[str, Dict[str, Any]]:
        """
        Validate every section of a parsed document.

        Raises:
            ValidationError: On an unknown section or invalid key
        """
        lines = lines or {}
        result: Dict[str, Dict[str, Any]] = {}
        for section, values in document.items():
            schema = self.schema_for(section)
            if schema is None:
                if self.strict:
                    raise ValidationError(
                        f"unknown section [{section}]", line=lines.get((section, ""))
                    )
                result[section] = dict(values)
                continue
            result[section] = schema.validate(values, section, lines)
        return result
