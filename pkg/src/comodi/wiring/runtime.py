"""Project execution: link every instance once, then call the entry point.

Two backends share one contract. ``MockBackend`` evaluates mock
expressions on an explicit frame stack, so cross-component recursion is
bounded by the configured call-depth limit rather than the interpreter's.
``NativeBackend`` loads the packaged binaries and drives the generated glue
through its boxed calling convention.
"""

import ctypes
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Protocol, Sequence

from comodi.cdl.model import PortSpec
from comodi.core.errors import (
    CallDepthExceeded,
    DefaultLiteralError,
    MissingBinaryError,
    MissingMockError,
    RuntimeFault,
)
from comodi.core.types import is_void, parse_literal, wire_type
from comodi.glue.mangling import component_prefix
from comodi.glue.param_string import parse_param_string
from comodi.glue.plan import GluePlan, plan_glue
from comodi.glue.remote import RemoteLayout, decode_request, decode_response, encode_request, encode_response, plan_remote
from comodi.repo.manifest import PackageManifest
from comodi.utils.constants import DEFAULT_CALL_DEPTH_LIMIT
from comodi.utils.logging import RunLogger
from comodi.utils.storage_helpers import atomic_write_bytes
from comodi.wiring.bind import Backend, WiringPlan
from comodi.wiring.mock import CALL, LOAD, NEG, PUSH, Instr, MockImplementations, compile_mocks

logger = logging.getLogger("comodi.runtime")


@dataclass
class ExecutionReport:
    entry: str
    backend: str
    value: Any
    link_calls: dict[str, int]
    # Business calls per instance, the entry call included
    call_counts: dict[str, int] = field(default_factory=dict)
    port_calls: dict[str, int] = field(default_factory=dict)
    # Wiring-entry invocations after linking finished
    runtime_wiring_calls: int = 0
    remote_messages: int = 0
    remote_bytes: int = 0

    @property
    def total_calls(self) -> int:
        return sum(self.call_counts.values())


class ExecutionBackend(Protocol):
    name: str

    def allocate(self) -> None: ...

    def link(self, instance: str, param_string: str) -> None: ...

    def wiring_calls(self) -> int: ...

    def link_calls(self) -> dict[str, int]: ...

    def call(self, instance: str, port: str, args: Sequence[Any]) -> Any: ...


def coerce(value: Any, type_name: str) -> Any:
    """Convert a number to the representation of a scalar type."""
    wire = wire_type(type_name)
    if wire is None or value is None:
        return value
    return int(value) if wire.numeric == "int" else float(value)


def fill_arguments(
    instance: str,
    port: PortSpec,
    args: Sequence[Any],
    defaults: Sequence[Optional[str]],
) -> list[Any]:
    """Arguments extended with defaults for missing trailing parameters.

    Raises:
        RuntimeFault: Too many arguments, or a missing one has no default
    """
    if len(args) > port.arity:
        raise RuntimeFault(instance, port.local_name, f"takes {port.arity} arguments, got {len(args)}")
    full = list(args)
    for index in range(len(args), port.arity):
        param = port.params[index]
        if defaults[index] is None:
            raise RuntimeFault(instance, port.local_name, f"missing argument '{param.name}' has no default")
        try:
            full.append(parse_literal(defaults[index], param.type_name))
        except DefaultLiteralError as e:
            raise RuntimeFault(instance, port.local_name, str(e)) from e
    try:
        return [coerce(value, param.type_name) for value, param in zip(full, port.params)]
    except (OverflowError, ValueError) as e:
        raise RuntimeFault(instance, port.local_name, f"argument out of range: {e}") from e


# ============================================================================
# Mock backend
# ============================================================================


@dataclass(frozen=True)
class _Handle:
    """Child reference: a provides port of a linked instance."""

    instance: str
    port: PortSpec
    layout: Optional[RemoteLayout] = None


@dataclass
class _Frame:
    instance: str
    port: PortSpec
    code: tuple[Instr, ...]
    args: list[Any]
    children: Mapping[str, Optional[_Handle]]
    layout: Optional[RemoteLayout] = None
    pc: int = 0
    stack: list[Any] = field(default_factory=list)


class MockBackend:
    name = Backend.MOCK.value

    def __init__(
        self,
        plan: WiringPlan,
        mocks: MockImplementations,
        depth_limit: int = DEFAULT_CALL_DEPTH_LIMIT,
    ):
        """Compile the mocks of every instance.

        Raises:
            MissingMockError: A provides port has no mock
            MockDefinitionError: A mock does not compile
        """
        self.plan = plan
        self.depth_limit = depth_limit
        self.programs = compile_mocks(mocks, {i: p.descriptor for i, p in plan.instances.items()})
        missing = [
            f"{instance}.{port.local_name}"
            for instance in plan.link_order
            for port in plan.instances[instance].descriptor.provides
            if (instance, port.local_name) not in self.programs
        ]
        if missing:
            raise MissingMockError(f"no mock for {', '.join(missing)}")

        self.children: dict[str, dict[str, Optional[_Handle]]] = {}
        self._link_calls: Counter[str] = Counter()
        self.call_counts: Counter[str] = Counter()
        self.port_calls: Counter[str] = Counter()
        self.remote_messages = 0
        self.remote_bytes = 0

    def allocate(self) -> None:
        for instance, instance_plan in self.plan.instances.items():
            self.children[instance] = {port.local_name: None for port in instance_plan.descriptor.uses}

    def link(self, instance: str, param_string: str) -> None:
        """Wiring entry of one instance: assign its child references."""
        self._link_calls[instance] += 1
        slots = self.children[instance]
        for binding in parse_param_string(param_string).bindings:
            if binding.uses_port not in slots:
                raise RuntimeFault(instance, binding.uses_port, "paramString names an unknown uses port")
            target = self.plan.instances.get(binding.instance)
            port = target.descriptor.provided(binding.target) if target is not None else None
            if port is None:
                raise RuntimeFault(instance, binding.uses_port, f"cannot resolve {binding.instance}.{binding.target}")
            layout = plan_remote(port, target.descriptor.type_defs) if port.remote else None
            slots[binding.uses_port] = _Handle(binding.instance, port, layout)

    def wiring_calls(self) -> int:
        return sum(self._link_calls.values())

    def link_calls(self) -> dict[str, int]:
        return {instance: self._link_calls[instance] for instance in self.plan.instances}

    def _frame(self, instance: str, port: PortSpec, args: Sequence[Any], layout: Optional[RemoteLayout]) -> _Frame:
        values = fill_arguments(instance, port, args, self.plan.instances[instance].defaults[port.local_name])
        if layout is not None:
            message = encode_request(layout, values)
            self.remote_messages += 1
            self.remote_bytes += len(message)
            values = decode_request(layout, message)
        self.call_counts[instance] += 1
        self.port_calls[f"{instance}.{port.local_name}"] += 1
        program = self.programs[(instance, port.local_name)]
        return _Frame(instance, port, program.code, values, self.children[instance], layout)

    def _result(self, frame: _Frame) -> Any:
        if is_void(frame.port.return_type):
            return None
        try:
            value = coerce(frame.stack[-1], frame.port.return_type)
        except (OverflowError, ValueError) as e:
            raise RuntimeFault(frame.instance, frame.port.local_name, f"result out of range: {e}") from e
        if frame.layout is not None:
            reply = encode_response(frame.layout, value)
            self.remote_bytes += len(reply)
            value = decode_response(frame.layout, reply)
        return value

    def call(self, instance: str, port: str, args: Sequence[Any]) -> Any:
        """Evaluate a provides port and everything it calls.

        Raises:
            RuntimeFault: Division by zero, an unbound uses port, or bad arity
            CallDepthExceeded: Nested calls exceed the depth limit
        """
        spec = self.plan.instances[instance].descriptor.provided(port)
        if spec is None:
            raise RuntimeFault(instance, port, "not a provides port")
        frames = [self._frame(instance, spec, args, None)]
        result = None

        while frames:
            frame = frames[-1]
            if frame.pc == len(frame.code):
                frames.pop()
                value = self._result(frame)
                if frames:
                    frames[-1].stack.append(0.0 if value is None else value)
                else:
                    result = value
                continue

            instr = frame.code[frame.pc]
            frame.pc += 1
            stack = frame.stack
            if instr.op == PUSH:
                stack.append(instr.arg)
            elif instr.op == LOAD:
                stack.append(frame.args[instr.arg])
            elif instr.op == NEG:
                stack.append(-stack.pop())
            elif instr.op == CALL:
                call_args = stack[len(stack) - instr.argc :]
                del stack[len(stack) - instr.argc :]
                handle = frame.children.get(instr.arg)
                if handle is None:
                    raise RuntimeFault(frame.instance, str(instr.arg), "uses port is not bound")
                if len(frames) >= self.depth_limit:
                    raise CallDepthExceeded(frame.instance, str(instr.arg), self.depth_limit, sum(self.call_counts.values()))
                uses = self.plan.instances[frame.instance].descriptor.used(str(instr.arg))
                if uses is not None and len(call_args) < uses.arity:
                    uses_defaults = self.plan.instances[frame.instance].defaults[uses.local_name]
                    call_args = fill_arguments(frame.instance, uses, call_args, uses_defaults)
                frames.append(self._frame(handle.instance, handle.port, call_args, handle.layout))
            else:
                right = stack.pop()
                left = stack.pop()
                if instr.op == "add":
                    stack.append(left + right)
                elif instr.op == "sub":
                    stack.append(left - right)
                elif instr.op == "mul":
                    stack.append(left * right)
                else:
                    if right == 0:
                        raise RuntimeFault(frame.instance, frame.port.local_name, "division by zero")
                    stack.append(left / right)
        return result


# ============================================================================
# Native backend
# ============================================================================


class CmdiValue(ctypes.Union):
    _fields_ = [
        ("i", ctypes.c_int),
        ("l", ctypes.c_long),
        ("f", ctypes.c_float),
        ("d", ctypes.c_double),
        ("c", ctypes.c_char),
        ("p", ctypes.c_void_p),
    ]


CMDI_FN = ctypes.CFUNCTYPE(ctypes.c_int, ctypes.c_int, ctypes.POINTER(CmdiValue), ctypes.POINTER(CmdiValue))
CMDI_RESOLVER = ctypes.CFUNCTYPE(ctypes.c_void_p, ctypes.c_char_p, ctypes.c_char_p)


def _box(slot: CmdiValue, member: str, value: Any) -> None:
    if member == "c":
        slot.c = bytes([int(value) & 0xFF])
    else:
        setattr(slot, member, value)


def _unbox(slot: CmdiValue, member: str) -> Any:
    value = getattr(slot, member)
    return value[0] if member == "c" and isinstance(value, bytes) else value


class NativeBackend:
    """Packaged binaries loaded through the host's dynamic loader.

    Each instance loads its own copy of the binary, so two instances of
    one package keep separate child references.
    """

    name = Backend.NATIVE.value

    def __init__(
        self,
        plan: WiringPlan,
        packages: Mapping[str, tuple[PackageManifest, Mapping[str, bytes]]],
        platform: str,
        work_dir: Path,
    ):
        """Stage every instance's binary under ``work_dir``.

        Args:
            packages: Verified package contents keyed by instance id

        Raises:
            MissingBinaryError: A package has no binary for the platform
        """
        self.plan = plan
        self.platform = platform
        self.paths: dict[str, Path] = {}
        self.glue: dict[str, GluePlan] = {}
        self.libraries: dict[str, ctypes.CDLL] = {}
        for instance, instance_plan in plan.instances.items():
            manifest, files = packages[instance]
            entry = manifest.binary_for(platform)
            if entry is None:
                raise MissingBinaryError(f"{manifest.name} {manifest.version} has no binary for {platform}")
            path = work_dir / instance / Path(entry.path).name
            atomic_write_bytes(path, files[entry.path])
            self.paths[instance] = path
            self.glue[instance] = plan_glue(instance_plan.descriptor)
        self._resolver = CMDI_RESOLVER(self._resolve)

    def _prefix(self, instance: str) -> str:
        descriptor = self.plan.instances[instance].descriptor
        return component_prefix(descriptor.name, descriptor.major)

    def _resolve(self, instance: bytes, global_name: bytes) -> Optional[int]:
        library = self.libraries.get(instance.decode("utf-8"))
        if library is None:
            return None
        try:
            return ctypes.cast(getattr(library, global_name.decode("utf-8")), ctypes.c_void_p).value
        except AttributeError:
            return None

    def allocate(self) -> None:
        for instance, path in self.paths.items():
            self.libraries[instance] = ctypes.CDLL(str(path), mode=ctypes.RTLD_LOCAL)
            logger.debug(f"Loaded {path} for {instance}")

    def link(self, instance: str, param_string: str) -> None:
        entry = getattr(self.libraries[instance], self.glue[instance].link_entry)
        entry.argtypes = [ctypes.c_char_p, CMDI_RESOLVER]
        entry.restype = ctypes.c_int
        failures = entry(param_string.encode("utf-8"), self._resolver)
        if failures != 0:
            raise RuntimeFault(instance, "link", f"{failures} bindings could not be resolved")

    def _counter(self, instance: str, suffix: str) -> int:
        function = getattr(self.libraries[instance], f"{self._prefix(instance)}_{suffix}")
        function.restype = ctypes.c_int
        return int(function())

    def wiring_calls(self) -> int:
        return sum(self._counter(instance, "link_count") for instance in self.libraries)

    def link_calls(self) -> dict[str, int]:
        return {instance: self._counter(instance, "link_count") for instance in self.libraries}

    def call(self, instance: str, port: str, args: Sequence[Any]) -> Any:
        instance_plan = self.plan.instances[instance]
        spec = instance_plan.descriptor.provided(port)
        trampoline = self.glue[instance].trampoline(port)
        if spec is None or trampoline is None:
            raise RuntimeFault(instance, port, "port has no trampoline")
        # project overrides live in the plan, not in the compiled glue
        values = fill_arguments(instance, spec, args, instance_plan.defaults[port])
        function = CMDI_FN(ctypes.cast(getattr(self.libraries[instance], trampoline.global_name), ctypes.c_void_p).value)
        argv = (CmdiValue * max(trampoline.total_argc, 1))()
        argc = 0
        for param, value in zip(trampoline.params, values):
            for slot in param.values:
                _box(argv[slot.index], slot.member, value[slot.field] if slot.field else coerce(value, param.type_name))
                argc = slot.index + 1
        result = (CmdiValue * max(len(trampoline.return_values), 1))()
        if function(argc, argv, result) != 0:
            raise RuntimeFault(instance, port, f"trampoline rejected {argc} arguments")
        if not trampoline.return_values:
            return None
        if trampoline.returns_aggregate:
            return {slot.field: _unbox(result[slot.index], slot.member) for slot in trampoline.return_values}
        return _unbox(result[0], trampoline.return_values[0].member)

    def faults(self) -> int:
        return sum(self._counter(instance, "fault_count") for instance in self.libraries)


# ============================================================================
# Execution
# ============================================================================


def run(
    plan: WiringPlan,
    backend: ExecutionBackend,
    run_logger: Optional[RunLogger] = None,
) -> ExecutionReport:
    """Link every instance once, in link order, then call the entry point.

    Raises:
        RuntimeFault: A business call failed (CallDepthExceeded included)
    """
    entry = plan.project.entry
    entry_name = f"{entry.instance}.{entry.port}"
    if run_logger:
        run_logger.started(entry_name, backend.name)

    try:
        backend.allocate()
        for instance in plan.link_order:
            backend.link(instance, plan.param_string(instance))
            if run_logger:
                run_logger.linked(instance, plan.param_string(instance))
        linked = backend.wiring_calls()

        port = plan.instances[entry.instance].descriptor.provided(entry.port)
        assert port is not None
        try:
            args = [parse_literal(text, param.type_name) for text, param in zip(entry.args, port.params)]
        except DefaultLiteralError as e:
            raise RuntimeFault(entry.instance, entry.port, str(e)) from e
        value = backend.call(entry.instance, port.local_name, args)
        runtime_wiring = backend.wiring_calls() - linked
    except RuntimeFault as e:
        if run_logger:
            run_logger.failed(str(e))
        raise

    report = ExecutionReport(
        entry=entry_name,
        backend=backend.name,
        value=value,
        link_calls=backend.link_calls(),
        runtime_wiring_calls=runtime_wiring,
    )
    if isinstance(backend, MockBackend):
        report.call_counts = dict(sorted(backend.call_counts.items()))
        report.port_calls = dict(sorted(backend.port_calls.items()))
        report.remote_messages = backend.remote_messages
        report.remote_bytes = backend.remote_bytes
    else:
        report.port_calls = {entry_name: 1}

    if run_logger:
        run_logger.finished(f"{entry_name} = {value}", report.call_counts)
    logger.info(f"Ran {entry_name} on {backend.name}: {value}")
    return report


def run_mock(
    plan: WiringPlan,
    mocks: MockImplementations,
    depth_limit: int = DEFAULT_CALL_DEPTH_LIMIT,
    run_logger: Optional[RunLogger] = None,
) -> ExecutionReport:
    return run(plan, MockBackend(plan, mocks, depth_limit), run_logger)
