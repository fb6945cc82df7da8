"""HTTP service wrapper: pydantic schemas, handlers, FastAPI app."""
