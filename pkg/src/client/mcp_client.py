"""Smoke-test harness for the Microwave QR tool server.

Connects over stdio (spawning ``python -m src.core.server``) or streamable
HTTP, then round-trips a QR symbol, tabulates the closed-form ABEP and, when
the client config carries a ``sweep`` section, runs it remotely.
"""

import argparse
import asyncio
import json
import os
from contextlib import asynccontextmanager
from types import SimpleNamespace
from typing import Any, AsyncIterator, Optional, Sequence

from mcp import ClientSession, StdioServerParameters, types
from mcp.client.stdio import stdio_client
from mcp.client.streamable_http import streamablehttp_client

from ..core.config import Settings, load_config
from ..core.logs import configure_logging, get_logger

log = get_logger(__name__)

CLOSED_FORM_C_LL = 0.1


def build_args(argv: Optional[Sequence[str]] = None) -> SimpleNamespace:
    p = argparse.ArgumentParser(prog="irsqr-client")
    p.add_argument("--config", default=os.getenv("MCP_CLIENT_CONFIG", os.path.join("config", "mcp_client.json")))
    a = p.parse_args(argv)
    cfg = load_config(a.config) if os.path.exists(a.config) else {}
    return SimpleNamespace(
        transport=cfg.get("transport", "stdio"),
        url=cfg.get("url", "http://127.0.0.1:8000/mcp"),
        server=cfg.get("server", "src.core.server"),
        python_cmd=cfg.get("python_cmd", "python"),
        payload=cfg.get("payload", "IRS microwave QR code"),
        version=int(cfg.get("version") or 5),
        ec_level=cfg.get("ec_level", "H"),
        sweep=cfg.get("sweep"),
    )


def unwrap_result(res: types.CallToolResult) -> Any:
    """Structured output if present, else the first text block (JSON-decoded when possible)."""
    if getattr(res, "structuredOutput", None) is not None:
        return res.structuredOutput
    for c in res.content:
        if isinstance(c, types.TextContent):
            try:
                return json.loads(c.text)
            except json.JSONDecodeError:
                return c.text
    return [c.model_dump() for c in res.content]


def stdio_params(server: str, python_cmd: str) -> StdioServerParameters:
    target = [server] if server.endswith(".py") else ["-m", server]
    cmd = python_cmd.split()
    return StdioServerParameters(command=cmd[0], args=cmd[1:] + target)


@asynccontextmanager
async def open_session(args: SimpleNamespace) -> AsyncIterator[ClientSession]:
    if args.transport in ("http", "streamable-http"):
        transport = streamablehttp_client(args.url)
    else:
        transport = stdio_client(stdio_params(args.server, args.python_cmd))
    async with transport as streams:
        read, write = streams[0], streams[1]
        async with ClientSession(read, write) as session:
            await session.initialize()
            yield session


async def exercise_tools(session: ClientSession, args: SimpleNamespace) -> bool:
    """Call every tool once; False when the QR round trip does not hold."""
    tools = await session.list_tools()
    log.info("client.tools", names=[t.name for t in tools.tools])

    enc = unwrap_result(
        await session.call_tool(
            "qr_encode_text",
            {"payload": args.payload, "version": args.version, "ec_level": args.ec_level, "border": 0},
        )
    )
    if not enc.get("success"):
        log.error("client.encode_failed", error=enc.get("error_message"))
        return False
    log.info("client.encoded", side=enc["side"], mask=enc["mask"])

    dec = unwrap_result(await session.call_tool("qr_decode_pbm", {"pbm": enc["pbm"], "border": 0}))
    round_trip = bool(dec.get("success")) and dec.get("payload") == args.payload
    log.info("client.decoded", success=dec.get("success"), payload=dec.get("payload"), round_trip=round_trip)

    for m in (2, 4, 8, 16):
        res = unwrap_result(await session.call_tool("abep_closed_form", {"c_ll": CLOSED_FORM_C_LL, "modulation": m}))
        log.info("client.closed_form", c_ll=CLOSED_FORM_C_LL, M=m, abep=res.get("abep"), asep=res.get("asep"))

    if args.sweep:
        res = unwrap_result(await session.call_tool("run_sweep", {"config": args.sweep}))
        if res.get("success"):
            log.info("client.sweep", rows=len(res["rows"]), bitmaps=len(res["bitmaps"]))
        else:
            log.error("client.sweep_failed", error=res.get("error_message"))
    return round_trip


async def main(argv: Optional[Sequence[str]] = None) -> bool:
    settings = Settings.from_env()
    configure_logging(settings.log_level, settings.log_json)
    args = build_args(argv)
    log.info("client.connect", transport=args.transport, target=args.url if args.transport != "stdio" else args.server)
    async with open_session(args) as session:
        return await exercise_tools(session, args)


if __name__ == "__main__":
    raise SystemExit(0 if asyncio.run(main()) else 1)
