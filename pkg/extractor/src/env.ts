import path from "node:path";
import { fileURLToPath } from "node:url";
import { env } from "@huggingface/transformers";

/**
 * Configure model resolution once per process.
 *
 * HF_ENDPOINT redirects downloads to a hub mirror (needed behind proxies;
 * pair it with NODE_EXTRA_CA_CERTS when the mirror uses a private CA).
 * Downloads land in a local cache next to the package so repeated runs and
 * tests stay offline.
 */
export function configureModelEnv(cacheDir?: string): void {
  const endpoint = process.env.HF_ENDPOINT;
  if (endpoint) {
    env.remoteHost = endpoint.replace(/\/$/, "");
  }
  const here = path.dirname(fileURLToPath(import.meta.url));
  env.cacheDir = cacheDir ?? process.env.EXTRACTOR_CACHE_DIR ?? path.join(here, "..", "..", ".cache");
}
