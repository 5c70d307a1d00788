// Browser entry point. The only configuration is the service base URL,
// read from the <meta name="service-base-url"> tag; an empty value means
// same-origin.

import { SearchClient } from "./api.js";
import { setupApp } from "./app.js";
import { SearchSession } from "./session.js";

function baseUrl(): string {
    const meta = document.querySelector<HTMLMetaElement>('meta[name="service-base-url"]');
    return meta?.content ?? "";
}

const app = setupApp(document, {
    client: new SearchClient(baseUrl()),
    session: new SearchSession(window.sessionStorage),
});
void app.reloadGames();
