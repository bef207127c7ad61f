from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.config import settings
from app.routes import chords, evaluation, personalize
from app.utils.run_monitor import run_monitor

app = FastAPI(
    title=settings.app_name,
    version="1.0.0",
    description="Chord label parsing, interval profiles, vocabulary decoding and evaluation",
    debug=settings.debug,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:8080", "http://127.0.0.1:8080"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(chords.router, prefix="/chords", tags=["Chords"])
app.include_router(personalize.router, prefix="/personalize", tags=["Personalization"])
app.include_router(evaluation.router, prefix="/evaluation", tags=["Evaluation"])


@app.get("/health")
async def health():
    return run_monitor.get_health_status()


@app.get("/")
async def root():
    return {"message": f"Welcome to {settings.app_name}", "version": app.version}


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
