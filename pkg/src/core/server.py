from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass
from typing import Any, AsyncIterator, Dict, Optional

from mcp.server.fastmcp import Context, FastMCP
from pydantic import ValidationError

from ..expcli.sweeps import run_sweep_async
from ..models import QrDecodeResult, QrSpec, SweepConfig
from ..modem import ModuleMatrix
from ..phy import abep_theoretical, asep_theoretical
from ..qrcodec import add_border, encode_symbol, qr_decode
from .config import Settings
from .errors import IrsQrError
from .logs import configure_logging, get_logger

log = get_logger(__name__)


@dataclass
class AppContext:
    settings: Settings
    executor: ThreadPoolExecutor


@asynccontextmanager
async def lifespan(server: FastMCP) -> AsyncIterator[AppContext]:
    settings = Settings.from_env()
    pool = ThreadPoolExecutor(max_workers=settings.threads)
    try:
        yield AppContext(settings=settings, executor=pool)
    finally:
        pool.shutdown(wait=True)


mcp = FastMCP(name="Microwave QR", lifespan=lifespan, dependencies=["numpy", "scipy", "structlog"])


@mcp.tool()
async def qr_encode_text(
    ctx: Context,
    payload: str,
    version: int = 5,
    ec_level: str = "H",
    mask: Optional[int] = None,
    border: int = 0,
) -> Dict:
    try:
        spec = QrSpec(version=version, ec_level=ec_level, mask=mask, border=border)
        symbol, chosen = encode_symbol(payload, spec.version, spec.ec_level, spec.mask)
    except (ValidationError, IrsQrError, ValueError) as e:
        return {"success": False, "error_message": str(e)}
    m = add_border(symbol, spec.border)
    return {"success": True, "pbm": m.to_pbm(), "side": m.n, "mask": chosen}


@mcp.tool()
async def qr_decode_pbm(ctx: Context, pbm: str, border: int = 0) -> Dict:
    try:
        m = ModuleMatrix.from_pbm(pbm)
    except ValueError as e:
        return QrDecodeResult(success=False, error_message=str(e)).model_dump(mode="json")
    res = qr_decode(m, border)
    out = res.model_dump(mode="json", exclude={"payload"})
    out["payload"] = res.payload.decode("utf-8", errors="replace") if res.payload is not None else None
    return out


@mcp.tool()
async def abep_closed_form(ctx: Context, c_ll: float, modulation: int) -> Dict:
    try:
        return {"abep": abep_theoretical(c_ll, modulation), "asep": asep_theoretical(c_ll, modulation)}
    except ValueError as e:
        return {"success": False, "error_message": str(e)}


@mcp.tool()
async def run_sweep(ctx: Context, config: Dict[str, Any]) -> Dict:
    """Run an ABEP or QR sweep; QR sample bitmaps come back as PBM text."""
    try:
        cfg = SweepConfig.model_validate(config)
        res = await run_sweep_async(cfg, ctx.request_context.lifespan_context.executor)
    except (ValidationError, IrsQrError, ValueError) as e:
        log.warning("tool.run_sweep_failed", error=str(e))
        return {"success": False, "error_message": str(e)}
    return {
        "success": True,
        "rows": [r.model_dump(mode="json") for r in res.rows],
        "bitmaps": [
            {
                "x": b.x,
                "M": b.modulation,
                "original": b.original.to_pbm(),
                "recovered": b.recovered.to_pbm(),
                "recognizable": b.recognizable,
            }
            for b in res.bitmaps
        ],
    }


def serve(settings: Settings) -> None:
    configure_logging(settings.log_level, settings.log_json)
    mcp.settings.host = settings.host
    mcp.settings.port = settings.port
    # stdio for local MCP clients; MCP_TRANSPORT=streamable-http serves http://host:port/mcp
    if settings.transport in ("http", "streamable-http"):
        mcp.run(transport="streamable-http")
    else:
        mcp.run()


if __name__ == "__main__":
    serve(Settings.from_env())
