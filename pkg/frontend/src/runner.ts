/**
 * Test-suite runner page script.
 *
 * Chains the driver's test URLs inside an iframe: load the start URL, wait
 * for the page to settle (or for the per-test watchdog if it never loads),
 * then navigate the iframe to the driver's `next` endpoint and let the 302
 * take it to the following test.  The runner holds no test-order knowledge
 * of its own and never touches a validation URL; only payload execution
 * inside a test page may do that.
 *
 * Plain script, no modules, no libraries: the page it runs on must work in
 * the same quirk-ridden browsers it measures.
 */

interface RunnerParams {
  token: string | null;
  start: string;
  watchdogMs: number;
  maxRetries: number;
}

interface RunnerState {
  token: string;
  currentUrl: string;
  testsStarted: number;
  stalls: number;
  completed: boolean;
  failed: boolean;
}

interface RunnerApi {
  parseParams(search: string): RunnerParams;
  isDonePath(path: string | null): boolean;
  backoffMs(attempt: number, baseMs?: number): number;
  start(win: Window): RunnerState | null;
}

(function () {
  const DEFAULT_WATCHDOG_MS = 2500;
  const SETTLE_MS = 250;
  const MAX_NAVIGATIONS = 5000;

  function parseParams(search: string): RunnerParams {
    const params: { [key: string]: string } = {};
    const query = search.charAt(0) === "?" ? search.slice(1) : search;
    const parts = query.split("&");
    for (let i = 0; i < parts.length; i++) {
      if (!parts[i]) continue;
      const eq = parts[i].indexOf("=");
      const key = eq < 0 ? parts[i] : parts[i].slice(0, eq);
      const value = eq < 0 ? "" : decodeURIComponent(parts[i].slice(eq + 1));
      params[key] = value;
    }
    const token = params["token"] || null;
    const watchdog = parseInt(params["watchdog"] || "", 10);
    return {
      token: token,
      start: params["start"] || (token ? "/t/" + token + "/0" : ""),
      watchdogMs: isFinite(watchdog) && watchdog > 0 ? watchdog : DEFAULT_WATCHDOG_MS,
      maxRetries: 3,
    };
  }

  function isDonePath(path: string | null): boolean {
    return !!path && path.indexOf("/done/") === 0;
  }

  function backoffMs(attempt: number, baseMs?: number): number {
    const base = baseMs || 250;
    const capped = Math.min(attempt, 4);
    return base * Math.pow(2, capped);
  }

  function start(win: Window): RunnerState | null {
    const doc = win.document;
    const params = parseParams(win.location.search);
    const counter = doc.getElementById("qp-counter");

    function show(text: string) {
      if (counter) counter.textContent = text;
    }

    if (!params.token) {
      show("missing token");
      return null;
    }

    const state: RunnerState = {
      token: params.token,
      currentUrl: "",
      testsStarted: 0,
      stalls: 0,
      completed: false,
      failed: false,
    };
    (win as any).__qpRunnerState = state;

    const frame = doc.getElementById("qp-frame") as HTMLIFrameElement | null;
    if (!frame) {
      show("runner frame missing");
      state.failed = true;
      return state;
    }

    const nextUrl = "/n/" + params.token;
    let navigations = 0;
    let retries = 0;
    let watchdogTimer: ReturnType<typeof win.setTimeout> | null = null;
    let settleTimer: ReturnType<typeof win.setTimeout> | null = null;

    function clearTimers() {
      if (watchdogTimer !== null) {
        win.clearTimeout(watchdogTimer);
        watchdogTimer = null;
      }
      if (settleTimer !== null) {
        win.clearTimeout(settleTimer);
        settleTimer = null;
      }
    }

    function complete() {
      if (state.completed) return;
      state.completed = true;
      clearTimers();
      show("complete (" + state.testsStarted + " tests)");
    }

    function navigate(url: string) {
      if (state.completed || state.failed) return;
      navigations++;
      if (navigations > MAX_NAVIGATIONS) {
        state.failed = true;
        show("aborted: navigation budget exhausted");
        return;
      }
      state.currentUrl = url;
      clearTimers();
      watchdogTimer = win.setTimeout(onWatchdog, params.watchdogMs);
      frame!.src = url;
    }

    function onWatchdog() {
      // The page never finished loading; count a stall, back off, skip on.
      state.stalls++;
      retries++;
      if (retries > params.maxRetries) {
        // Bounded retries exceeded; keep advancing without backoff so the
        // suite still terminates (skipped tests finalize as NA).
        navigate(nextUrl);
        return;
      }
      win.setTimeout(function () {
        navigate(nextUrl);
      }, backoffMs(retries));
    }

    function loadedDocUrl(): string | null {
      // The document's own URL, not contentWindow.location: some engines
      // update the latter eagerly while a navigation is still in flight.
      try {
        const doc = frame!.contentDocument;
        return doc ? doc.URL : null;
      } catch (e) {
        return null; // cross-origin or detached; treat as unknown
      }
    }

    function pathOf(url: string | null): string | null {
      if (!url) return null;
      const match = url.match(/^[a-z][a-z0-9+.-]*:\/\/[^/]*(\/[^?#]*)/i);
      return match ? match[1] : null;
    }

    function loadedDoneMarker(): boolean {
      // The completion page carries a marker element; checking the loaded
      // document survives engines that misreport iframe URLs after a 302.
      try {
        const doc = frame!.contentDocument;
        return !!(doc && doc.getElementById("qp-done"));
      } catch (e) {
        return false;
      }
    }

    function onFrameLoad() {
      if (state.completed || state.failed) return;
      const docUrl = loadedDocUrl();
      if (docUrl && docUrl.indexOf("about:") === 0) {
        // Initial blank document; the real page is still on its way and
        // the watchdog stays armed for it.
        return;
      }
      clearTimers();
      retries = 0;
      if (isDonePath(pathOf(docUrl)) || loadedDoneMarker()) {
        complete();
        return;
      }
      // Every non-completion load is a test page (advances arrive here via
      // the driver's own 302, so the runner learns the count as it goes).
      state.testsStarted++;
      show("test " + state.testsStarted);
      // Give the page's payload a moment to fire its callbacks, then move on.
      settleTimer = win.setTimeout(function () {
        navigate(nextUrl);
      }, Math.min(SETTLE_MS, params.watchdogMs));
    }

    if (frame.addEventListener) {
      frame.addEventListener("load", onFrameLoad);
    } else {
      (frame as any).onload = onFrameLoad;
    }

    // The completion page also announces itself; some engines hide the
    // iframe location after redirects.
    win.addEventListener("message", function (event: MessageEvent) {
      if (typeof event.data === "string" && event.data === "qp:done:" + params.token) {
        complete();
      }
    });

    navigate(params.start);
    return state;
  }

  const api: RunnerApi = {
    parseParams: parseParams,
    isDonePath: isDonePath,
    backoffMs: backoffMs,
    start: start,
  };
  (window as any).__qpRunner = api;
})();
