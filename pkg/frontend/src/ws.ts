// Reconnecting websocket wrapper: the dashboard's only network path is
// the station's local gateway socket. Backoff doubles from 1 s and is
// capped at 30 s.

export interface SocketHandlers {
    onFrame(doc: unknown): void;
    onState(state: 'live' | 'reconnecting' | 'offline'): void;
}

export class ReconnectingSocket {
    private socket: WebSocket | null = null;
    private backoffMs = 1000;
    private closed = false;

    constructor(
        private readonly url: string,
        private readonly handlers: SocketHandlers,
    ) {}

    connect(): void {
        if (this.closed) return;
        const socket = new WebSocket(this.url);
        this.socket = socket;
        socket.onopen = () => {
            this.backoffMs = 1000;
            this.handlers.onState('live');
        };
        socket.onmessage = (event) => {
            try {
                this.handlers.onFrame(JSON.parse(event.data as string));
            } catch {
                // not JSON: drop silently, the reducer never sees it
            }
        };
        socket.onclose = () => {
            if (this.closed) return;
            this.handlers.onState('reconnecting');
            setTimeout(() => this.connect(), this.backoffMs);
            this.backoffMs = Math.min(this.backoffMs * 2, 30000);
        };
        socket.onerror = () => {
            socket.close();
        };
    }

    send(text: string): boolean {
        if (this.socket !== null && this.socket.readyState === WebSocket.OPEN) {
            this.socket.send(text);
            return true;
        }
        return false;
    }

    close(): void {
        this.closed = true;
        this.handlers.onState('offline');
        this.socket?.close();
    }
}
